/* header */
public class Main {
    // entry point
    public static void main(String[] args) {
        int a = 6, b = 3;
        int z = a/**/-b;
        String multi = "a\"b/*c*/d\"";
        String t = "// nor this";
        String bs = "\\"; // backslash before the quote
        /**/
        String s = "/* not a comment */";
    }
}
