#!/usr/bin/env python3
g = rb"\"#"  # raw bytes
# full line comment with "quote
class K:
    """Docstring # hash."""
    n = 0  # field
u = """triple
# inside
"""
lst = [1,  # first
       2]
e = """x""" "y"  # adjacent strings
