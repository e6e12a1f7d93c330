// Package main is a fixture.
package main

import "fmt"

func main() {
    a, b := 6, 3
    int w = x // trailing
        + y;
    dq := '"'
    int z = a/**/-b;
    fmt.Println(a, b) /* print */
}
