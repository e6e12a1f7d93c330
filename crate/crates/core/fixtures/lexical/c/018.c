#include <stdio.h>

/* file header
   with two lines */
int main(void) {
    int a = 6, b = 3;
    const char *s = "/* not a comment */";
    int x = a / b; /* divide */ int y = a /*inline*/ + b;
    char esc = '\\'; /* escaped backslash char */
    char a = '\'';
    // comment with "unbalanced quote
    return 0; // done
}
