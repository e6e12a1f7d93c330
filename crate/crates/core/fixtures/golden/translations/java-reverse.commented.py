words = input().split()
print(" ".join(words))
