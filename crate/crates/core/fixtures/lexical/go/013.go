// Package main is a fixture.
package main

import "fmt"

func main() {
    a, b := 6, 3
    /**/
    s := "/* not a comment */";
    // comment with "unbalanced quote
    raw := `/* not */ a // comment`
    fmt.Println(a, b) /* print */
}
