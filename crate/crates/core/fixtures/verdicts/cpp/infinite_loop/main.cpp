#include <iostream>

int main() {
    long long a, b;
    std::cin >> a >> b;
    volatile long long i = 0;
    for (;;) {
        i = i + 1;
        if (i < 0) break;
        i = 0;
    }
    std::cout << a + b << std::endl;
    return 0;
}
