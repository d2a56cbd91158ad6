"""Naming problems."""

myConstant = 3


class bad_class:
    """A class."""

    def MethodName(self, X):
        """A method."""
        return X + myConstant
