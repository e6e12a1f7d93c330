n = int(input())
f = 1
for i in range(2, n + 1):
    f = f * i
print(f)
