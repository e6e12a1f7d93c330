import java.util.Scanner;

public class Main {
    public static void main(String[] args) {
        Scanner in = new Scanner(System.in);
        int n = in.nextInt();
        long mod = 1000000007L;
        long f = 1;
        for (int i = 2; i <= n; i++) {
            f = f * i % mod;
        }
        System.out.println(f);
    }
}
