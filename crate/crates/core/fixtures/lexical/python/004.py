#!/usr/bin/env python3
u = """triple
# inside
"""
lst = [1,  # first
       2]
e = """x""" "y"  # adjacent strings
