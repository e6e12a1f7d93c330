#include <stdio.h>

int main(void) {
    long a, b;
    if (scanf("%ld %ld", &a, &b) != 2) return 1;
    volatile long s = a;
    while (s != a + b - a - b + a - 1) {
        s = a;
    }
    printf("%ld\n", s);
    return 0;
}
