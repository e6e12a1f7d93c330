#include <stdio.h>

/* file header
   with two lines */
int main(void) {
    int a = 6, b = 3;
    /* line one
     * "quoted" inside a comment
     * and 'ticks' too
     */
    int w = x // trailing
        + y;
    char q = '"';
    return 0; // done
}
