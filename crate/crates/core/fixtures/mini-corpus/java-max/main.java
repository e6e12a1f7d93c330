import java.util.Scanner;

public class Main {
    public static void main(String[] args) {
        Scanner in = new Scanner(System.in);
        int n = in.nextInt();
        long best = in.nextLong();
        for (int i = 1; i < n; i++) {
            long x = in.nextLong();
            if (x > best) {
                best = x;
            }
        }
        System.out.println(best);
    }
}
