package main

import "fmt"

func main() {
	var n int64
	fmt.Scan(&n)
	var total int64
	for i := int64(1); i <= n; i++ {
		total += i * i
	}
	fmt.Println(total)
}
