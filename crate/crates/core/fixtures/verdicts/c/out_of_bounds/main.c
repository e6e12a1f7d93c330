#include <stdio.h>

int main(void) {
    long a, b;
    if (scanf("%ld %ld", &a, &b) != 2) return 1;
    static int grid[4][4];
    volatile long far = 100000000L * (a > -1000000 ? 1 : 0);
    grid[0][far] = (int)b;
    printf("%ld\n", a + b + grid[0][0]);
    return 0;
}
