#include <cstdio>
#include <string>

/* file header
   with two lines */
int main(void) {
    int a = 6, b = 3;
    // comment with "unbalanced quote
    int k = 10 /* ten */ * 2; // twenty
    char q = '"';
    int z = a/**/-b;
    const char *multi = "a\"b/*c*/d\"";
    return 0; // done
}
