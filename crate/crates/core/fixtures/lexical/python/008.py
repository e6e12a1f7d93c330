#!/usr/bin/env python3
w = r"\#raw" + "\\"  # backslash then comment
b = b'#bytes'  # bytes literal
s = "# not a comment"
