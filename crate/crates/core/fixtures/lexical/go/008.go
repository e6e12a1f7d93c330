// Package main is a fixture.
package main

import "fmt"

func main() {
    a, b := 6, 3
    int x = a / b; /* divide */ int y = a /*inline*/ + b;
    /**/
    s := "/* not a comment */";
    fmt.Println(a, b) /* print */
}
