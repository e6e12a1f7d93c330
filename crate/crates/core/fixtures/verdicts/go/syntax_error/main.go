package main

import "fmt"

func main() {
	var a, b int64
	fmt.Scan(&a, &b
	fmt.Println(a + b)
}
