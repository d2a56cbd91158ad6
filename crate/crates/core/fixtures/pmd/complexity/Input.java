public class Input {
    static int score(int a, int b, int c, int d, int e, int f, int g, int h) {
        int s = 0;
        if (a > 0 && b > 0 || c > 0 && d > 0 || e > 0) {
            s++;
        }
        if (a > 1) {
            if (b > 1) {
                if (c > 1) {
                    s += 2;
                }
            }
        }
        for (int i = 0; i < h; i++) {
            if (i % 2 == 0) {
                s++;
            } else if (i % 3 == 0) {
                s--;
            } else if (i % 5 == 0) {
                s += f;
            } else if (i % 7 == 0) {
                s -= g;
            }
            while (s > 100) {
                s /= 2;
            }
        }
        switch (a) {
            case 1:
                s++;
                break;
            case 2:
                s--;
                break;
        }
        return s;
    }
}
