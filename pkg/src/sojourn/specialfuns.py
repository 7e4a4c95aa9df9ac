"""
Special-function kernel: gamma, regularized incomplete beta, Bessel J_nu,
probabilists' Hermite polynomials and the standard normal law.

Everything here is a pure function of its arguments.  Array inputs are
accepted where the callers need them (covariance evaluation on whole
lattices, Hermite features of Monte Carlo samples); the scalar routines
return Python floats.
"""

import math

import numpy as np

__all__ = [
    "DomainError",
    "HERMITE_MAX_DEGREE",
    "BESSEL_SERIES_SWITCH",
    "gamma",
    "lgamma",
    "incomplete_beta",
    "bessel_j",
    "hermite",
    "hermite_all",
    "std_normal_pdf",
    "std_normal_cdf",
]


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


# ----------------------------------------------------------------------------
# Gamma
# ----------------------------------------------------------------------------

# Lanczos coefficients for g = 7, n = 9 (relative error ~1e-15 on x > 0).
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _lanczos_sum(z):
    s = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        s += c / (z + i)
    return s


def gamma(x):
    """Gamma function for real x > 0.

    Lanczos approximation, with the reflection formula below 1/2 where
    the series loses relative accuracy.
    """
    x = float(x)
    if not x > 0.0 or math.isinf(x):
        raise DomainError("gamma requires finite x > 0, got %r" % x)
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    if x > 171.0:
        raise OverflowError("gamma(%g) overflows double precision" % x)
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    # split the power so t**(z+1/2) cannot overflow before exp(-t) scales it
    half_pow = t ** (0.5 * (z + 0.5))
    return math.sqrt(2.0 * math.pi) * half_pow * (half_pow * math.exp(-t)) * _lanczos_sum(z)


def lgamma(x):
    """log Gamma(x) for x > 0, same approximation as :func:`gamma`."""
    x = float(x)
    if not x > 0.0 or math.isinf(x):
        raise DomainError("lgamma requires finite x > 0, got %r" % x)
    if x < 0.5:
        return math.log(math.pi / math.sin(math.pi * x)) - lgamma(1.0 - x)
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    return 0.5 * math.log(2.0 * math.pi) + (z + 0.5) * math.log(t) - t + math.log(_lanczos_sum(z))


# ----------------------------------------------------------------------------
# Regularized incomplete beta
# ----------------------------------------------------------------------------

def _betacf(mu, p, q, max_iter=500, eps=1e-16):
    # modified Lentz evaluation of the continued fraction for I_mu(p, q)
    tiny = 1e-300
    qab = p + q
    qap = p + 1.0
    qam = p - 1.0
    c = 1.0
    d = 1.0 - qab * mu / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for k in range(1, max_iter + 1):
        k2 = 2 * k
        aa = k * (q - k) * mu / ((qam + k2) * (p + k2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(p + k) * (qab + k) * mu / ((p + k2) * (qap + k2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge "
                          "(mu=%g, p=%g, q=%g)" % (mu, p, q))


def incomplete_beta(mu, p, q):
    """Regularized incomplete beta function I_mu(p, q), 0 < mu <= 1.

    Continued fraction, evaluated directly for mu < p/(p+q) and through
    the symmetry I_mu(p,q) = 1 - I_{1-mu}(q,p) above that point.
    mu = 0 is accepted as the limit value 0.
    """
    mu, p, q = float(mu), float(p), float(q)
    if not (p > 0.0 and q > 0.0) or math.isinf(p) or math.isinf(q):
        raise DomainError("incomplete_beta requires p > 0 and q > 0")
    if not 0.0 <= mu <= 1.0:
        raise DomainError("incomplete_beta requires 0 < mu <= 1, got %r" % mu)
    if mu == 0.0:
        return 0.0
    if mu == 1.0:
        return 1.0
    log_front = (lgamma(p + q) - lgamma(p) - lgamma(q)
                 + p * math.log(mu) + q * math.log1p(-mu))
    front = math.exp(log_front)
    if mu < (p + 1.0) / (p + q + 2.0):
        val = front * _betacf(mu, p, q) / p
    else:
        val = 1.0 - front * _betacf(1.0 - mu, q, p) / q
    return min(1.0, max(0.0, val))


# ----------------------------------------------------------------------------
# Bessel J_nu
# ----------------------------------------------------------------------------

# Below this argument the power series is used.  At x = 17 the largest
# series term is ~5e5, so cancellation costs about 1e-10 absolute; above
# it the Hankel expansion's smallest term is below 1e-14 for nu <= 6.
BESSEL_SERIES_SWITCH = 17.0


def _bessel_series(nu, x):
    x = np.asarray(x, dtype=float)
    half = 0.5 * x
    term = np.power(half, nu) / gamma(nu + 1.0) if nu > 0 else np.ones_like(x)
    total = term.copy()
    q = -half * half
    for k in range(1, 200):
        term = term * q / (k * (k + nu))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def _bessel_hankel(nu, x):
    # J_nu(x) = sqrt(2/(pi x)) (P cos(chi) - Q sin(chi)),  chi = x - (nu/2 + 1/4) pi
    x = np.asarray(x, dtype=float)
    mu = 4.0 * nu * nu
    eight_x = 8.0 * x
    P = np.ones_like(x)
    Q = np.zeros_like(x)
    term = np.ones_like(x)
    last = np.full_like(x, np.inf)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, 80):
        term = term * (mu - (2 * k - 1) ** 2) / (k * eight_x)
        mag = np.abs(term)
        # asymptotic series: stop at the smallest term, per element
        active &= mag < last
        if not active.any():
            break
        contrib = np.where(active, term, 0.0)
        if k % 2 == 1:
            sign = -1.0 if (k // 2) % 2 == 0 else 1.0
            Q = Q - sign * contrib
        else:
            sign = -1.0 if (k // 2) % 2 == 1 else 1.0
            P = P + sign * contrib
        last = np.where(active, mag, last)
        active &= mag > 1e-17
    chi = x - (0.5 * nu + 0.25) * np.pi
    return np.sqrt(2.0 / (np.pi * x)) * (P * np.cos(chi) - Q * np.sin(chi))


def _bessel_integral(nu, x):
    # Bessel's integral for real order; used only where neither expansion is safe
    from scipy import integrate

    def one(xv):
        a, _ = integrate.quad(lambda t: math.cos(nu * t - xv * math.sin(t)), 0.0, math.pi,
                              limit=400, epsabs=1e-13, epsrel=1e-13)
        s = math.sin(nu * math.pi)
        b = 0.0
        if s != 0.0:
            t_max = math.asinh(800.0 / xv) + 1.0
            b, _ = integrate.quad(lambda t: math.exp(-xv * math.sinh(t) - nu * t), 0.0, t_max,
                                  limit=400, epsabs=1e-14, epsrel=1e-13)
        return (a - s * b) / math.pi

    return np.array([one(float(v)) for v in np.ravel(x)]).reshape(np.shape(x))


def bessel_j(nu, x):
    """Bessel function of the first kind J_nu(x) for nu >= 0, x >= 0.

    Accepts scalar or array ``x``; returns the same shape.
    """
    nu = float(nu)
    if nu < 0.0 or not math.isfinite(nu):
        raise DomainError("bessel_j requires nu >= 0, got %r" % nu)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0.0) or np.any(np.isnan(xa)):
        raise DomainError("bessel_j requires x >= 0")
    out = np.empty_like(xa)
    small = xa < BESSEL_SERIES_SWITCH
    hankel = (~small) & (xa >= max(BESSEL_SERIES_SWITCH, 1.5 * nu * nu))
    middle = ~(small | hankel)
    if small.any():
        out[small] = _bessel_series(nu, xa[small])
    if hankel.any():
        out[hankel] = _bessel_hankel(nu, xa[hankel])
    if middle.any():
        out[middle] = _bessel_integral(nu, xa[middle])
    if np.ndim(x) == 0:
        return float(out)
    return out


# ----------------------------------------------------------------------------
# Hermite polynomials and the normal law
# ----------------------------------------------------------------------------

# Degrees above this are rejected: the recurrence values exceed 1e40 for
# moderate arguments and k! no longer fits comfortably in a double.
HERMITE_MAX_DEGREE = 60


def _check_degree(k):
    if int(k) != k or k < 0:
        raise DomainError("Hermite degree must be a nonnegative integer, got %r" % (k,))
    if k > HERMITE_MAX_DEGREE:
        raise DomainError("Hermite degree %d exceeds the supported maximum %d"
                          % (k, HERMITE_MAX_DEGREE))


def hermite(k, x):
    """Probabilists' Hermite polynomial H_k(x) by three-term recurrence.

    H_0 = 1, H_1 = x, H_{k+1} = x H_k - k H_{k-1}.
    """
    _check_degree(k)
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if k == 0:
        return float(h_prev) if x.ndim == 0 else h_prev
    h = x.copy()
    for j in range(1, k):
        h_prev, h = h, x * h - j * h_prev
    return float(h) if x.ndim == 0 else h


def hermite_all(max_degree, x):
    """Stack of H_0..H_max_degree evaluated at ``x``; shape (max_degree+1,) + x.shape."""
    _check_degree(max_degree)
    x = np.asarray(x, dtype=float)
    out = np.empty((max_degree + 1,) + x.shape)
    out[0] = 1.0
    if max_degree >= 1:
        out[1] = x
    for j in range(1, max_degree):
        out[j + 1] = x * out[j] - j * out[j - 1]
    return out


_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def std_normal_pdf(x):
    """Standard normal density."""
    x = np.asarray(x, dtype=float)
    val = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
    return float(val) if val.ndim == 0 else val


def std_normal_cdf(x):
    """Standard normal distribution function, via erfc for tail accuracy."""
    if np.ndim(x) == 0:
        return 0.5 * math.erfc(-float(x) / math.sqrt(2.0))
    from scipy.special import erfc
    return 0.5 * erfc(-np.asarray(x, dtype=float) / math.sqrt(2.0))
