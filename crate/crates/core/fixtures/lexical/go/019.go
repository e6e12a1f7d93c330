// Package main is a fixture.
package main

import "fmt"

func main() {
    a, b := 6, 3
    bs := "\\"; // backslash before the quote
    multi := "a\"b/*c*/d\"";
    t := "// nor this";
    /* star-slash lookalike: * / and /* nested opener */
    r := '\'' // rune quote
    int x = a / b; /* divide */ int y = a /*inline*/ + b;
    fmt.Println(a, b) /* print */
}
