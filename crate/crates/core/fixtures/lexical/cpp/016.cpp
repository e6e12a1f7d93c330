#include <cstdio>
#include <string>

/* file header
   with two lines */
int main(void) {
    int a = 6, b = 3;
    char esc = '\\'; /* escaped backslash char */
    int big = 1'000'000; // digit separators
    /* line one
     * "quoted" inside a comment
     * and 'ticks' too
     */
    return 0; // done
}
