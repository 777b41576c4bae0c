"""Special mathematical functions"""


import scipy.special
import numpy as np


def erf(x):
    """Error function"""
    return scipy.special.erf(x)

def erfc(x):
    """Complementary error function"""
    return scipy.special.erfc(x)

def erfcinv(y):
    """Inverse of the complementary error function"""
    return scipy.special.erfcinv(y)

def bessel_k0(x):
    """Modified Bessel function of the second kind of order zero, x > 0"""
    _x = np.asarray(x, dtype=float)
    if np.any(_x <= 0):
        raise ValueError("bessel_k0 is only defined for x > 0")
    return scipy.special.k0(x)

def bessel_k1(x):
    """Modified Bessel function of the second kind of order one, x > 0"""
    _x = np.asarray(x, dtype=float)
    if np.any(_x <= 0):
        raise ValueError("bessel_k1 is only defined for x > 0")
    return scipy.special.k1(x)

def sinc(x):
    """Unnormalized sinc, sin(x)/x"""
    return np.sinc(np.asarray(x) / np.pi)

def si(x):
    """Sine integral"""
    return scipy.special.sici(x)[0]

def lower_gamma(a, x):
    """Non-regularized lower incomplete gamma function"""
    return scipy.special.gammainc(a, x) * scipy.special.gamma(a)

def gaussian_moment(t, a, k):
    r"""$\int_0^a e^{-r^2 t^2} r^k dr$ for t > 0"""
    t = np.asarray(t, dtype=float)
    return lower_gamma((k + 1) / 2, (a * t)**2) / (2 * t**(k + 1))
