#include <cstdio>
#include <string>

/* file header
   with two lines */
int main(void) {
    int a = 6, b = 3;
    const char *s = "/* not a comment */";
    int x = a / b; /* divide */ int y = a /*inline*/ + b;
    char esc = '\\'; /* escaped backslash char */
    int big = 1'000'000; // digit separators
    /* line one
     * "quoted" inside a comment
     * and 'ticks' too
     */
    return 0; // done
}
