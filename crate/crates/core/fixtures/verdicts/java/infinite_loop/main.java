import java.util.Scanner;

public class Main {
    public static void main(String[] args) {
        Scanner in = new Scanner(System.in);
        long a = in.nextLong();
        long b = in.nextLong();
        long i = 0;
        while (i >= 0) {
            i = (i + 1) % 1000;
        }
        System.out.println(a + b);
    }
}
