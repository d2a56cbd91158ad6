"""A clean module."""


def add(a, b):
    """Return the sum."""
    return a + b
