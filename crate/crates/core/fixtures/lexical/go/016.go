// Package main is a fixture.
package main

import "fmt"

func main() {
    a, b := 6, 3
    /* star-slash lookalike: * / and /* nested opener */
    r := '\'' // rune quote
    int x = a / b; /* divide */ int y = a /*inline*/ + b;
    fmt.Println(a, b) /* print */
}
