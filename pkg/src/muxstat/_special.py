"""Special functions used by the distribution catalog.

Thin wrappers over :mod:`scipy.special` so that every gamma / error-function
evaluation in the package goes through one place. On the domains the catalog
uses (positive real gamma arguments, finite normal and Student-t arguments)
the wrapped routines are accurate to better than 1e-12 relative; the test
suite checks this against mpmath.
"""

import numpy as np
from scipy import special as _sp

EULER_GAMMA = float(np.euler_gamma)
LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


def gammaln(x):
    return _sp.gammaln(x)


def gamma(x):
    return _sp.gamma(x)


def ndtr(x):
    """Standard normal CDF."""
    return _sp.ndtr(x)


def ndtri(p):
    """Standard normal quantile."""
    return _sp.ndtri(p)


def log_ndtr(x):
    return _sp.log_ndtr(x)


def stdtr(nu, t):
    """Student-t CDF with ``nu`` degrees of freedom."""
    return _sp.stdtr(nu, t)


def stdtrit(nu, p):
    """Student-t quantile with ``nu`` degrees of freedom."""
    return _sp.stdtrit(nu, p)


def pdtr(k, lam):
    """Poisson CDF P(N <= k) for integer k."""
    return _sp.pdtr(k, lam)


def expit(x):
    return _sp.expit(x)


def logit(p):
    return _sp.logit(p)
