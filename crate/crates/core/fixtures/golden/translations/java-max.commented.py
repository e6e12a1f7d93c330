import sys

data = sys.stdin.read().split()
n = int(data[0])
best = int(data[1])
for x in data[2:n + 1]:
    if int(x) > best:
        best = int(x)
print(best)
