import java.util.Scanner;

public class Main {
    public static void main(String[] args) {
        Scanner in = new Scanner(System.in);
        long a = in.nextLong();
        long b = in.nextLong();
        int[][] grid = new int[4][4];
        int row = grid.length;
        System.out.println(a + b + grid[row][0]);
    }
}
