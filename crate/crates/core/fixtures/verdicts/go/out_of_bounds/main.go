package main

import "fmt"

func main() {
	var a, b int
	fmt.Scan(&a, &b)
	grid := make([][]int, 4)
	for i := range grid {
		grid[i] = make([]int, 4)
	}
	row := len(grid)
	fmt.Println(a + b + grid[row][0])
}
