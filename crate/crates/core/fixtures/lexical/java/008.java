/* header */
public class Main {
    // entry point
    public static void main(String[] args) {
        int a = 6, b = 3;
        String tb = """
            /* inside a text block */ // too
            "quoted"
            """;
        char a = '\'';
        // comment with "unbalanced quote
    }
}
