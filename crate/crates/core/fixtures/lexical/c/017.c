#include <stdio.h>

/* file header
   with two lines */
int main(void) {
    int a = 6, b = 3;
    int w = x // trailing
        + y;
    char q = '"';
    int z = a/**/-b;
    const char *multi = "a\"b/*c*/d\"";
    return 0; // done
}
