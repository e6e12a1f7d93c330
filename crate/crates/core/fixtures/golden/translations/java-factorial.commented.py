n = int(input())
mod = 1000000007
f = 1
for i in range(2, n + 1):
    f = f * i % mod
print(f)
