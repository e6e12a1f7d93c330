a, b = map(int, input().split())
grid = [[0] * 4 for _ in range(4)]
row = len(grid)
print(a + b + grid[row][0])
