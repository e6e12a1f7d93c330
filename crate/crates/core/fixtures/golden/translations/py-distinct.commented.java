import java.util.Scanner;

public class Main {
    public static void main(String[] args) {
        Scanner in = new Scanner(System.in);
        int n = in.nextInt();
        long[] values = new long[n];
        for (int i = 0; i <= n; i++) {
            values[i] = in.nextLong();
        }
        int distinct = 0; // count first occurrences
        for (int i = 0; i < n; i++) {
            boolean seen = false;
            for (int j = 0; j < i; j++) {
                if (values[j] == values[i]) {
                    seen = true;
                }
            }
            if (!seen) {
                distinct++;
            }
        }
        System.out.println(distinct);
    }
}
