/* header */
public class Main {
    // entry point
    public static void main(String[] args) {
        int a = 6, b = 3;
        String url = "http://example.com/*path*/";
        char u = '\u0041'; // unicode escape
        char slash = '/';
    }
}
