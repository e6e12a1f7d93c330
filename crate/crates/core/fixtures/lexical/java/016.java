/* header */
public class Main {
    // entry point
    public static void main(String[] args) {
        int a = 6, b = 3;
        char esc = '\\'; /* escaped backslash char */
        /** real javadoc
         * @return nothing
         */
        /* line one
     * "quoted" inside a comment
     * and 'ticks' too
     */
    }
}
