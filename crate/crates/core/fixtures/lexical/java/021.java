/* header */
public class Main {
    // entry point
    public static void main(String[] args) {
        int a = 6, b = 3;
        int k = 10 /* ten */ * 2; // twenty
        char q = '"';
        int z = a/**/-b;
        String multi = "a\"b/*c*/d\"";
    }
}
