"""
Tensor Hermite basis, Monte Carlo Hermite coefficients, Hermite rank
and Parseval diagnostics for functionals of standard Gaussian vectors.

A multi-index is a plain tuple of nonnegative ints.  Functionals ``G``
are vectorised callables mapping an (N, m) array of Gaussian vectors to
N values.

Even-order coefficients are estimated with antithetic pairs (w, -w): each
pair contributes ``e_v(w) (G(w) + G(-w)) / 2``.  Odd orders use plain
Monte Carlo on the w half of each pair, which keeps their error bars
honest when G is even (the antithetic estimate would then be exactly 0).
Standard errors are computed over pairs.  Samples are drawn in fixed-size blocks, block b
from the stream (seed, b), so results do not depend on how blocks are
scheduled.
"""

import csv
import io
import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np

from .fieldsim import f_cdf, stream
from .specialfuns import DomainError, gamma, hermite_all

__all__ = [
    "ConfigurationError",
    "ExpansionReport",
    "enumerate_multiindices",
    "v_factorial",
    "e_v",
    "hermite_coefficient",
    "expansion_report",
    "hermite_rank",
    "parseval_check",
    "c4",
    "closed_form_cv_f_indicator",
    "f_indicator",
]

BLOCK_PAIRS = 1 << 15
MAX_ORDER = 20


class ConfigurationError(ValueError):
    pass


def enumerate_multiindices(m, kappa):
    """All v = (k_1..k_m), k_j >= 0, sum k_j = kappa, in ascending lexicographic order."""
    if m < 1 or kappa < 0:
        raise DomainError("need m >= 1 and kappa >= 0")
    out = []
    # bars-and-stars: choose the component index of each of the kappa quanta
    for combo in combinations_with_replacement(range(m), kappa):
        v = [0] * m
        for j in combo:
            v[j] += 1
        out.append(tuple(v))
    return sorted(out)


def v_factorial(v):
    """v! = k_1! ... k_m! as an exact integer (orders up to 20)."""
    if sum(v) > MAX_ORDER:
        raise OverflowError("multi-index order %d above supported %d" % (sum(v), MAX_ORDER))
    out = 1
    for k in v:
        out *= math.factorial(k)
    return out


def e_v(v, omega):
    """prod_j H_{k_j}(omega_j); ``omega`` has trailing axis of length m."""
    omega = np.asarray(omega, dtype=float)
    if omega.shape[-1] != len(v):
        raise ValueError("omega has %d components, multi-index %d" % (omega.shape[-1], len(v)))
    out = np.ones(omega.shape[:-1])
    for j, k in enumerate(v):
        if k:
            out = out * hermite_all(k, omega[..., j])[k]
    return float(out) if out.ndim == 0 else out


# ----------------------------------------------------------------------------
# Monte Carlo estimation
# ----------------------------------------------------------------------------

def _pair_blocks(m, n_samples, seed):
    if n_samples < 100:
        raise ConfigurationError("need at least 100 samples, got %d" % n_samples)
    n_pairs = n_samples // 2
    b = 0
    done = 0
    while done < n_pairs:
        size = min(BLOCK_PAIRS, n_pairs - done)
        yield stream(seed, b).standard_normal((size, m))
        done += size
        b += 1


class _Accumulator:
    """Running sums for means and pair-level standard errors."""

    def __init__(self, n):
        self.s = np.zeros(n)
        self.s2 = np.zeros(n)
        self.count = 0

    def add(self, values):
        # values: (n_stat, n_pairs)
        self.s += values.sum(axis=1)
        self.s2 += (values * values).sum(axis=1)
        self.count += values.shape[1]

    def result(self):
        mean = self.s / self.count
        var = np.maximum(self.s2 / self.count - mean * mean, 0.0)
        se = np.sqrt(var / max(self.count - 1, 1))
        return mean, se


def _estimate(G, indices, m, n_samples, seed):
    """Estimates (mean, se) of C_v for each v in ``indices`` and of E G^2."""
    max_deg = max((max(v) for v in indices), default=0)
    acc = _Accumulator(len(indices) + 1)
    for w in _pair_blocks(m, n_samples, seed):
        g_plus = np.asarray(G(w), dtype=float)
        g_minus = np.asarray(G(-w), dtype=float)
        herm = [hermite_all(max_deg, w[:, j]) for j in range(m)]
        rows = np.empty((len(indices) + 1, w.shape[0]))
        for i, v in enumerate(indices):
            ev = np.ones(w.shape[0])
            for j, k in enumerate(v):
                if k:
                    ev = ev * herm[j][k]
            rows[i] = 0.5 * ev * (g_plus + g_minus) if sum(v) % 2 == 0 else ev * g_plus
        rows[-1] = 0.5 * (g_plus * g_plus + g_minus * g_minus)
        acc.add(rows)
    mean, se = acc.result()
    return mean, se


def hermite_coefficient(G, v, n_samples=1_000_000, seed=0):
    """Monte Carlo C_v = E[G(w) e_v(w)], w ~ N(0, I_m); returns (estimate, std_error)."""
    v = tuple(int(k) for k in v)
    mean, se = _estimate(G, [v], len(v), n_samples, seed)
    return float(mean[0]), float(se[0])


@dataclass(frozen=True)
class ExpansionReport:
    """Hermite coefficients up to ``kappa_max`` of one functional.

    ``hermite_rank`` is None when no order in 1..kappa_max shows a
    coefficient significantly different from zero.
    """

    m: int
    kappa_max: int
    coefficients: dict
    hermite_rank: object
    parseval_partial: list
    g2: tuple
    n_samples: int
    seed: int
    z: float = 4.0
    closed_form: dict = field(default_factory=dict)

    def partial_sum(self, kappa):
        for k, cum in self.parseval_partial:
            if k == kappa:
                return cum
        raise KeyError(kappa)

    def parseval_se(self, kappa):
        """Delta-method standard error of E G^2 minus the partial sum at ``kappa``."""
        var = self.g2[1] ** 2
        for v, (est, se) in self.coefficients.items():
            if sum(v) <= kappa:
                var += (2.0 * est * se / v_factorial(v)) ** 2
        return math.sqrt(var)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k%d" % (j + 1) for j in range(self.m)]
                   + ["estimate", "std_error", "closed_form_if_any"])
        for v in sorted(self.coefficients, key=lambda v: (sum(v), v)):
            est, se = self.coefficients[v]
            cf = self.closed_form.get(v)
            w.writerow(list(v) + ["%.10g" % est, "%.4g" % se, "" if cf is None else "%.10g" % cf])
        return buf.getvalue()

    def to_text(self):
        lines = [
            "m = %d" % self.m,
            "kappa_max = %d" % self.kappa_max,
            "n_samples = %d" % self.n_samples,
            "seed = %d" % self.seed,
            "hermite_rank = %s" % ("not_found" if self.hermite_rank is None else self.hermite_rank),
            "integral_G2 = %.8g +- %.2g" % self.g2,
        ]
        for k, cum in self.parseval_partial:
            lines.append("parseval_partial[%d] = %.8g  gap = %.6g"
                         % (k, cum, self.g2[0] - cum))
        return "\n".join(lines) + "\n"


def _rank_from(coefficients, kappa_max, z):
    for kappa in range(1, kappa_max + 1):
        for v, (est, se) in coefficients.items():
            if sum(v) == kappa and abs(est) > z * se:
                return kappa
    return None


def expansion_report(G, m, kappa_max, n_samples=1_000_000, seed=0, z=4.0, closed_form=None):
    """Estimate every C_v with |v| <= kappa_max from one antithetic sample set."""
    indices = [v for k in range(kappa_max + 1) for v in enumerate_multiindices(m, k)]
    mean, se = _estimate(G, indices, m, n_samples, seed)
    coefficients = {v: (float(mean[i]), float(se[i])) for i, v in enumerate(indices)}
    partial = []
    cum = 0.0
    for k in range(kappa_max + 1):
        cum += sum(c * c / v_factorial(v) for v, (c, _) in coefficients.items() if sum(v) == k)
        partial.append((k, cum))
    cf = {}
    if closed_form is not None:
        cf = {v: closed_form(v) for v in indices}
        cf = {v: x for v, x in cf.items() if x is not None}
    return ExpansionReport(m=m, kappa_max=kappa_max, coefficients=coefficients,
                           hermite_rank=_rank_from(coefficients, kappa_max, z),
                           parseval_partial=partial, g2=(float(mean[-1]), float(se[-1])),
                           n_samples=n_samples, seed=seed, z=z, closed_form=cf)


def hermite_rank(G, m, a_max_order, n_samples=1_000_000, seed=0, z=4.0):
    """Smallest order with a coefficient beyond z standard errors; None if none up to a_max_order."""
    if a_max_order < 1:
        raise ConfigurationError("a_max_order must be >= 1")
    indices = [v for k in range(1, a_max_order + 1) for v in enumerate_multiindices(m, k)]
    mean, se = _estimate(G, indices, m, n_samples, seed)
    coefficients = {v: (mean[i], se[i]) for i, v in enumerate(indices)}
    return _rank_from(coefficients, a_max_order, z)


def parseval_check(report, G=None, n_samples=None, seed=None):
    """E G^2 minus the report's cumulative sum of C_v^2 / v! at its top order.

    With ``G`` given, E G^2 is re-estimated from an independent sample
    (``n_samples``, ``seed``); otherwise the report's own estimate is used.
    """
    top = report.parseval_partial[-1][1]
    if G is None:
        return report.g2[0] - top
    n = report.n_samples if n_samples is None else n_samples
    s = report.seed + 1 if seed is None else seed
    mean, _ = _estimate(G, [], report.m, n, s)
    return float(mean[-1]) - top


# ----------------------------------------------------------------------------
# indicator of the Fisher-Snedecor excursion
# ----------------------------------------------------------------------------

def c4(a, n, m):
    """c4(a,n,m) = (na/(m-n))^(n/2) Gamma(m/2) / ((1 + na/(m-n))^(m/2) Gamma((m-n)/2) Gamma(n/2))."""
    if not a > 0:
        raise DomainError("level a must be positive")
    if not 1 <= n < m:
        raise DomainError("need 1 <= n < m")
    s = n * a / (m - n)
    return (s ** (0.5 * n) * gamma(0.5 * m)
            / ((1.0 + s) ** (0.5 * m) * gamma(0.5 * (m - n)) * gamma(0.5 * n)))


def closed_form_cv_f_indicator(v, a, n, m):
    """Exact C_v, |v| = 2, for G = 1{F_{n,m-n} > a}."""
    v = tuple(v)
    if sum(v) != 2 or len(v) != m:
        raise DomainError("closed form covers multi-indices of order 2 with m entries")
    if 2 not in v:
        return 0.0
    j = v.index(2)
    c = c4(a, n, m)
    return 2.0 * c / n if j < n else -2.0 * c / (m - n)


def f_indicator(a, n, m):
    """Vectorised G(w) = 1{ (sum_{j<n} w_j^2/n) / (sum_{j>=n} w_j^2/(m-n)) > a }."""
    if not 1 <= n < m:
        raise DomainError("need 1 <= n < m")

    def G(w):
        w = np.asarray(w, dtype=float)
        num = (w[:, :n] ** 2).sum(axis=1) / n
        den = (w[:, n:m] ** 2).sum(axis=1) / (m - n)
        # num > a den avoids dividing by a vanishing denominator
        return (num > a * den).astype(float)

    G.mean_exact = 1.0 - f_cdf(a, n, m)
    return G
