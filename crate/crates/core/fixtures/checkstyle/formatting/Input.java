import java.util.*;

public class Input
{
    public int sum(int[] xs){
        int total=0;
	for (int x : xs) total += x;
        return total;
    }
}
