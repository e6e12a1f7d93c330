// Package main is a fixture.
package main

import "fmt"

func main() {
    a, b := 6, 3
    bs := "\\"; // backslash before the quote
    multi := "a\"b/*c*/d\"";
    t := "// nor this";
    /* star-slash lookalike: * / and /* nested opener */
    fmt.Println(a, b) /* print */
}
