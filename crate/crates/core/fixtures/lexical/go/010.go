// Package main is a fixture.
package main

import "fmt"

func main() {
    a, b := 6, 3
    raw := `/* not */ a // comment`
    /* line one
     * "quoted" inside a comment
     * and 'ticks' too
     */
    int w = x // trailing
        + y;
    dq := '"'
    int z = a/**/-b;
    fmt.Println(a, b) /* print */
}
