#include <cstdio>
#include <string>

/* file header
   with two lines */
int main(void) {
    int a = 6, b = 3;
    std::string u8s = u8"// utf8";
    printf("he said \"// hi\"\n"); // a real comment
    const char *url = "http://example.com/*path*/";
    return 0; // done
}
