#include <iostream>
#include <vector>

int main() {
    long long a, b;
    std::cin >> a >> b;
    std::vector<std::vector<int>> grid(4, std::vector<int>(4, 0));
    int row = 4;
    std::cout << a + b + grid.at(row).at(0) << std::endl;
    return 0;
}
