"""Unused things."""
import os
import json


def work(value, extra):
    """Do work."""
    temp = 5
    return value * 2
