#include <stdio.h>

/* file header
   with two lines */
int main(void) {
    int a = 6, b = 3;
    /**/
    char slash = '/';
    /* star-slash lookalike: * / and /* nested opener */
    const char *s = "/* not a comment */";
    return 0; // done
}
