#include <cstdio>
#include <string>

/* file header
   with two lines */
int main(void) {
    int a = 6, b = 3;
    auto r = R"(/* raw */ "quote" // )";
    char a = '\'';
    // comment with "unbalanced quote
    return 0; // done
}
