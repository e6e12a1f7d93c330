#!/usr/bin/env python3
s = "# not a comment"
def f(a):
    # indented comment
    return a  # trailing
while False:
    pass
    # comment at block end
v = '''single # triple'''  # real comment
q = "a\"#b"
