#!/usr/bin/env python3
class K:
    """Docstring # hash."""
    n = 0  # field
u = """triple
# inside
"""
lst = [1,  # first
       2]
e = """x""" "y"  # adjacent strings
