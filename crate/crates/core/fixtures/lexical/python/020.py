#!/usr/bin/env python3
q = "a\"#b"
g = rb"\"#"  # raw bytes
# full line comment with "quote
