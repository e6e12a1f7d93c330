#!/usr/bin/env python3
u = """triple
# inside
"""
lst = [1,  # first
       2]
e = """x""" "y"  # adjacent strings
x = f"{1}#{2}"  # f-string with hash
cont = 1 + \
    2  # continued line
