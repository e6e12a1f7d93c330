// Package main is a fixture.
package main

import "fmt"

func main() {
    a, b := 6, 3
    /* line one
     * "quoted" inside a comment
     * and 'ticks' too
     */
    int w = x // trailing
        + y;
    dq := '"'
    int z = a/**/-b;
    int k = 10 /* ten */ * 2; // twenty
    printf("he said \"// hi\"\n"); // a real comment
    fmt.Println(a, b) /* print */
}
