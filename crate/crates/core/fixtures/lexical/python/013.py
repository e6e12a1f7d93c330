#!/usr/bin/env python3
b = b'#bytes'  # bytes literal
s = "# not a comment"
def f(a):
    # indented comment
    return a  # trailing
while False:
    pass
    # comment at block end
