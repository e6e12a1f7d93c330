#include <cstdio>
#include <string>

/* file header
   with two lines */
int main(void) {
    int a = 6, b = 3;
    printf("he said \"// hi\"\n"); // a real comment
    const char *url = "http://example.com/*path*/";
    auto d = R"xy( )" // still raw )xy";
    char slash = '/';
    return 0; // done
}
