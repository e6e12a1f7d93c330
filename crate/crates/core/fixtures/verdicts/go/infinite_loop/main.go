package main

import "fmt"

func main() {
	var a, b int64
	fmt.Scan(&a, &b)
	n := a
	for n >= a {
		n = a + b*0
	}
	fmt.Println(a + b)
}
