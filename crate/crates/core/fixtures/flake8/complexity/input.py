def classify(n, mode):
    if n < 0:
        return "neg"
    elif n == 0:
        return "zero"
    elif n < 10:
        if mode == 1:
            return "small-a"
        elif mode == 2:
            return "small-b"
        return "small"
    elif n < 100:
        for i in range(n):
            if i % 7 == 0 and mode:
                return "seven"
        return "medium"
    elif n < 1000:
        while n > 500:
            n -= 1
            if n == 600:
                break
        return "large"
    else:
        try:
            return str(n)
        except ValueError:
            return "?"
        except TypeError:
            return "??"
