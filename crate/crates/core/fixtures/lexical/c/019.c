#include <stdio.h>

/* file header
   with two lines */
int main(void) {
    int a = 6, b = 3;
    printf("he said \"// hi\"\n"); // a real comment
    const char *url = "http://example.com/*path*/";
    const char *t = "// nor this";
    const char *bs = "\\"; // backslash before the quote
    /**/
    char slash = '/';
    return 0; // done
}
