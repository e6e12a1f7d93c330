#!/usr/bin/env python3
t = 'it\'s # still a string'
if True:
    y = 1
# dedented comment between blocks
    z = 2
d = {"k#": 1}  # dict
w = r"\#raw" + "\\"  # backslash then comment
b = b'#bytes'  # bytes literal
s = "# not a comment"
