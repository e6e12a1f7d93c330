#!/usr/bin/env python3
while False:
    pass
    # comment at block end
v = '''single # triple'''  # real comment
q = "a\"#b"
g = rb"\"#"  # raw bytes
# full line comment with "quote
