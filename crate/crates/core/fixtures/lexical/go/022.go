// Package main is a fixture.
package main

import "fmt"

func main() {
    a, b := 6, 3
    printf("he said \"// hi\"\n"); // a real comment
    url := "http://example.com/*path*/";
    m := `multi
line // raw
`
    bs := "\\"; // backslash before the quote
    multi := "a\"b/*c*/d\"";
    fmt.Println(a, b) /* print */
}
