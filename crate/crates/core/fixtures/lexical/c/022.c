#include <stdio.h>

/* file header
   with two lines */
int main(void) {
    int a = 6, b = 3;
    char q = '"';
    int z = a/**/-b;
    const char *multi = "a\"b/*c*/d\"";
    printf("he said \"// hi\"\n"); // a real comment
    const char *url = "http://example.com/*path*/";
    return 0; // done
}
