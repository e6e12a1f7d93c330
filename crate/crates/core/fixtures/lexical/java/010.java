/* header */
public class Main {
    // entry point
    public static void main(String[] args) {
        int a = 6, b = 3;
        /* line one
     * "quoted" inside a comment
     * and 'ticks' too
     */
        int w = x // trailing
        + y;
        String j = "/** javadoc lookalike */";
        System.out.printf("he said \"// hi\"\n"); // a real comment
        String url = "http://example.com/*path*/";
    }
}
