"""Error-prone code."""


def risky(items=[]):
    """Risky."""
    try:
        return undefined_name + len(items)
    except:
        pass
    if items == None:
        return eval("1")
    return items
