"""Modified Bessel functions of the first kind, integer order.

``bessel_ie`` returns the exponentially scaled value exp(-x) I_n(x), which is
what the angular integrals need: they always appear multiplied by exp(-2/hbar).
"""
import math

import numpy as np

SERIES_CUTOFF = 15.0
MAX_ARGUMENT = 1e4


def _series(n, x):
    # sum_k (x/2)^(2k+n) / (k! (k+n)!), all terms positive
    half = 0.5 * x
    term = half ** n / math.factorial(n)
    total = term
    q = half * half
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + n))
        total += term
        if term < 1e-17 * total:
            return total


def _asymptotic_i0e(x):
    # Hankel expansion; terms shrink until k ~ 2x, x >= 15 gives ~1e-13 or better
    total = 1.0
    term = 1.0
    k = 0
    while True:
        k += 1
        new = term * (2 * k - 1) ** 2 / (8.0 * k * x)
        if new >= term or new < 1e-17:
            break
        term = new
        total += term
    return total / math.sqrt(2.0 * math.pi * x)


def _miller_ratio(n, x):
    """I_n(x) / I_0(x) by backward recurrence (stable for I)."""
    start = n + int(math.sqrt(80.0 * max(x, 1.0))) + 40
    b_next, b = 0.0, 1.0
    ratio_n = 0.0
    b0 = None
    for m in range(start, 0, -1):
        b_prev = b_next + (2.0 * m / x) * b
        b_next, b = b, b_prev
        if m - 1 == n:
            ratio_n = b
        if abs(b) > 1e250:
            b_next *= 1e-250
            b *= 1e-250
            ratio_n *= 1e-250
    b0 = b
    return ratio_n / b0


def bessel_ie(n, x):
    """Scaled modified Bessel function exp(-x) I_n(x) for integer n >= 0."""
    n = int(n)
    if n < 0:
        n = -n
    x = float(x)
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    if x < SERIES_CUTOFF:
        return _series(n, x) * math.exp(-x)
    i0e = _asymptotic_i0e(x)
    if n == 0:
        return i0e
    return i0e * _miller_ratio(n, x)


def bessel_i(n, x):
    """Modified Bessel function I_n(x), unscaled; x is capped at 1e4."""
    x = float(x)
    if x > MAX_ARGUMENT:
        raise ValueError("use bessel_ie beyond x = 1e4")
    if x < SERIES_CUTOFF:
        return _series(abs(int(n)), x) if x > 0 else (1.0 if n == 0 else 0.0)
    return bessel_ie(n, x) * math.exp(x)


modified_bessel_I = np.vectorize(bessel_i, otypes=[float])
modified_bessel_Ie = np.vectorize(bessel_ie, otypes=[float])
