#!/usr/bin/env python3
v = '''single # triple'''  # real comment
q = "a\"#b"
g = rb"\"#"  # raw bytes
# full line comment with "quote
class K:
    """Docstring # hash."""
    n = 0  # field
u = """triple
# inside
"""
