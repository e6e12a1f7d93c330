n = int(input())
if n < 2:
    print("NO")
else:
    i = 2
    prime = True
    while i * i <= n:
        if n % i == 0:
            prime = False
            break
        i += 1
    print("YES" if prime else "NO")
