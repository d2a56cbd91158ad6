public class Input {
    private static final int max_size = 10;
    private int Count;

    public int Get_count(int Value) {
        int TMP = Value + Count;
        return TMP;
    }
}
