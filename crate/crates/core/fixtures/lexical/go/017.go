// Package main is a fixture.
package main

import "fmt"

func main() {
    a, b := 6, 3
    int k = 10 /* ten */ * 2; // twenty
    printf("he said \"// hi\"\n"); // a real comment
    url := "http://example.com/*path*/";
    m := `multi
line // raw
`
    fmt.Println(a, b) /* print */
}
