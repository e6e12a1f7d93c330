#!/usr/bin/env python3
def f(a):
    # indented comment
    return a  # trailing
while False:
    pass
    # comment at block end
v = '''single # triple'''  # real comment
q = "a\"#b"
