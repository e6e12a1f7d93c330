/* header */
public class Main {
    // entry point
    public static void main(String[] args) {
        int a = 6, b = 3;
        char slash = '/';
        /* star-slash lookalike: * / and /* nested opener */
        String tb = """
            /* inside a text block */ // too
            "quoted"
            """;
        char a = '\'';
        // comment with "unbalanced quote
    }
}
