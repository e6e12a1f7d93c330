#!/usr/bin/env python3
# full line comment with "quote
class K:
    """Docstring # hash."""
    n = 0  # field
u = """triple
# inside
"""
