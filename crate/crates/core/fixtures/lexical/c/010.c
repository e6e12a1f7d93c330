#include <stdio.h>

/* file header
   with two lines */
int main(void) {
    int a = 6, b = 3;
    char esc = '\\'; /* escaped backslash char */
    char a = '\'';
    // comment with "unbalanced quote
    int k = 10 /* ten */ * 2; // twenty
    /* line one
     * "quoted" inside a comment
     * and 'ticks' too
     */
    return 0; // done
}
