#include <stdio.h>

int main(void) {
    int n;
    long x, best;
    if (scanf("%d %ld", &n, &best) != 2) return 1;
    for (int i = 1; i < n; i++) {
        scanf("%ld", &x);
        if (x < best) best = x;
    }
    printf("%ld\n", best);
    return 0;
}
