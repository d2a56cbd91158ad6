import os, sys


def Compute(a,b):
    if a == True:
        return a+b   
    x = [1,2 ,3]
    return os.path.join(str(a), "a-very-long-string-that-keeps-going-and-going-well-past-the-limit-of-the-checker")
