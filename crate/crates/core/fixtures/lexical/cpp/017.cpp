#include <cstdio>
#include <string>

/* file header
   with two lines */
int main(void) {
    int a = 6, b = 3;
    auto d = R"xy( )" // still raw )xy";
    char slash = '/';
    /* star-slash lookalike: * / and /* nested opener */
    auto r = R"(/* raw */ "quote" // )";
    return 0; // done
}
