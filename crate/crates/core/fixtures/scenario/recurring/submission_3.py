def pick(flag, xs):  
    if flag == True:
        return xs[0]  
    return None
