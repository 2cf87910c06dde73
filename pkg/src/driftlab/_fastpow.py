import math

from numba import njit


@njit(cache=True, inline="always")
def fpow(x, a):
    """x**a with shortcuts for the exponents the default scenarios use."""
    if a == 2.0:
        return x * x
    if a == 0.5:
        return math.sqrt(x)
    if a == 1.5:
        return x * math.sqrt(x)
    if a == 1.0:
        return x
    if a == 3.0:
        return x * x * x
    return x**a
