/* header */
public class Main {
    // entry point
    public static void main(String[] args) {
        int a = 6, b = 3;
        String bs = "\\"; // backslash before the quote
        /**/
        String s = "/* not a comment */";
        int x = a / b; /* divide */ int y = a /*inline*/ + b;
        char esc = '\\'; /* escaped backslash char */
    }
}
