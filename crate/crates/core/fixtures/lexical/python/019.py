#!/usr/bin/env python3
x = f"{1}#{2}"  # f-string with hash
cont = 1 + \
    2  # continued line
t = 'it\'s # still a string'
if True:
    y = 1
# dedented comment between blocks
    z = 2
d = {"k#": 1}  # dict
w = r"\#raw" + "\\"  # backslash then comment
