public class Input {
    private int unusedField;

    private void helper() {
    }

    public int compute(int value, int ignored) {
        int temp = 3;
        int result = value * 2;
        return result;
    }
}
