public class Input {
    public boolean check(String a, String b) {
        try {
            if (a == b) {
                return true;
            }
            return a.toUpperCase().equals(b);
        } catch (Exception e) {
        }
        return false;
    }
}
