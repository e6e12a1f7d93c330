#include <stdio.h>

/* file header
   with two lines */
int main(void) {
    int a = 6, b = 3;
    const char *t = "// nor this";
    const char *bs = "\\"; // backslash before the quote
    /**/
    char slash = '/';
    /* star-slash lookalike: * / and /* nested opener */
    const char *s = "/* not a comment */";
    return 0; // done
}
