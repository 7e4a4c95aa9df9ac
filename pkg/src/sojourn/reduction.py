"""
Analytic side of the reduction principle.

Window geometry enters through the density of the distance between two
independent uniform points of the window; the variance of the rank-level
Hermite projection is assembled from that density, the Hermite
coefficients and the components' power-law exponents.  The remaining
functions identify dominant components, form the limit weights, and
brute-force the multi-index inequalities that control higher orders.

Component indices are 0-based throughout.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import integrate

from .covariance import SVKind, evaluate, powerlaw_sv
from .hermite import enumerate_multiindices, v_factorial
from .specialfuns import DomainError

__all__ = [
    "DivergentConstant",
    "NoDominantComponent",
    "HypothesisFailed",
    "Shape",
    "WindowShape",
    "UNIT_SQUARE",
    "UNIT_DISC",
    "ComponentParams",
    "distance_density",
    "c1",
    "var_krk_asymptote",
    "dominant_components",
    "theorem5_weights",
    "Lemma2Report",
    "Lemma3Report",
    "check_lemma2",
    "check_lemma2_support",
    "check_lemma3",
]


class DivergentConstant(ArithmeticError):
    """sum alpha_j k_j >= d: the distance integral diverges at the origin."""


class NoDominantComponent(ArithmeticError):
    """Minimal-exponent components whose slowly varying ratios have no limit."""


class HypothesisFailed(ValueError):
    """A lemma's hypothesis does not hold; ``lhs`` and ``rhs`` say by how much."""

    def __init__(self, message, lhs=None, rhs=None, index=None):
        super().__init__(message)
        self.lhs = lhs
        self.rhs = rhs
        self.index = index


class Shape(str, Enum):
    UNIT_SQUARE = "unit_square"
    UNIT_DISC = "unit_disc"


@dataclass(frozen=True)
class WindowShape:
    """Unit square (side 1) or unit disc (radius 1), centred at the origin."""

    kind: Shape

    @property
    def diameter(self):
        return math.sqrt(2.0) if self.kind is Shape.UNIT_SQUARE else 2.0

    @property
    def area(self):
        return 1.0 if self.kind is Shape.UNIT_SQUARE else math.pi

    def sample(self, rng, size):
        """Uniform points in the window, shape (size, 2)."""
        if self.kind is Shape.UNIT_SQUARE:
            return rng.random((size, 2)) - 0.5
        rad = np.sqrt(rng.random(size))
        ang = 2.0 * np.pi * rng.random(size)
        return np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])


UNIT_SQUARE = WindowShape(Shape.UNIT_SQUARE)
UNIT_DISC = WindowShape(Shape.UNIT_DISC)


@dataclass(frozen=True)
class ComponentParams:
    """Per-component exponents and slowly varying kinds, F split (n, m) and level a."""

    alphas: tuple
    sv_kinds: tuple = None
    n: int = 1
    a: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(x) for x in self.alphas))
        kinds = self.sv_kinds
        if kinds is None:
            kinds = (SVKind.CONSTANT_ONE,) * len(self.alphas)
        object.__setattr__(self, "sv_kinds", tuple(SVKind(k) for k in kinds))
        if len(self.sv_kinds) != len(self.alphas):
            raise DomainError("one slowly varying kind per component")
        if any(not x > 0 for x in self.alphas):
            raise DomainError("exponents must be positive")
        if not 1 <= self.n < len(self.alphas):
            raise DomainError("need 1 <= n < m")

    @property
    def m(self):
        return len(self.alphas)


# ----------------------------------------------------------------------------
# distance densities and c1
# ----------------------------------------------------------------------------

def _square_density(rho):
    rho = np.asarray(rho, dtype=float)
    out = np.zeros_like(rho)
    lo = (rho >= 0) & (rho <= 1)
    r = rho[lo]
    out[lo] = 2.0 * r * (np.pi - 4.0 * r + r * r)
    hi = (rho > 1) & (rho <= math.sqrt(2.0))
    r = rho[hi]
    out[hi] = 2.0 * r * (4.0 * np.sqrt(r * r - 1.0) - (r * r + 2.0 - np.pi)
                         - 4.0 * np.arccos(1.0 / r))
    return np.maximum(out, 0.0)


def _disc_density(rho):
    rho = np.asarray(rho, dtype=float)
    out = np.zeros_like(rho)
    ok = (rho >= 0) & (rho <= 2)
    h = 0.5 * rho[ok]
    out[ok] = 4.0 * rho[ok] / np.pi * (np.arccos(h) - h * np.sqrt(np.maximum(1.0 - h * h, 0.0)))
    return out


def distance_density(shape, rho):
    """Density of |U - V| for U, V independent uniform in ``shape``; 0 off the support."""
    if shape.kind is Shape.UNIT_SQUARE:
        out = _square_density(rho)
    else:
        out = _disc_density(rho)
    return float(out) if out.ndim == 0 else out


def _c1_exponent(s, shape, d):
    if d != 2:
        raise DomainError("window shapes are planar; c1 needs d = 2")
    if s >= d:
        raise DivergentConstant("sum alpha_j k_j = %g >= d = %d: c1 diverges" % (s, d))
    if s == 0:
        return 1.0
    opts = dict(epsabs=0.0, epsrel=1e-11, limit=200)
    if shape.kind is Shape.UNIT_SQUARE:
        # on [0,1] psi(z)/z = 2(pi - 4z + z^2): integrate z^(1-s) times that exactly
        head = 2.0 * (np.pi / (2.0 - s) - 4.0 / (3.0 - s) + 1.0 / (4.0 - s))
        tail, _ = integrate.quad(lambda z: z ** (-s) * _square_density(z), 1.0, math.sqrt(2.0),
                                 **opts)
        return head + tail
    # disc: algebraic weight z^(1-s) absorbs the origin singularity
    def disc_over_z(z):
        h = 0.5 * z
        return 4.0 / np.pi * (math.acos(h) - h * math.sqrt(max(1.0 - h * h, 0.0)))

    val, _ = integrate.quad(disc_over_z, 0.0, 2.0, weight="alg", wvar=(1.0 - s, 0.0), **opts)
    return val


def c1(shape, alphas, k, d=2):
    """c1 = integral over [0, diam] of z^(-sum alpha_j k_j) psi(z) dz."""
    if len(alphas) != len(k):
        raise DomainError("alphas and multi-index differ in length")
    s = float(sum(a * kk for a, kk in zip(alphas, k)))
    return _c1_exponent(s, shape, d)


def var_krk_asymptote(params, shape, kappa, coeffs, r, d=2):
    """Leading-order Var K_{r,kappa} for the window shape scaled by r.

    |shape|^2 sum_v (C_v^2/v!) c1 r^(2d - sum alpha_j k_j) prod_j L_j(r)^k_j,
    summed over v in ``coeffs`` of order kappa with C_v != 0.
    """
    from .covariance import slowly_varying

    total = 0.0
    for v, cv in coeffs.items():
        if sum(v) != kappa or cv == 0.0:
            continue
        s = sum(a * k for a, k in zip(params.alphas, v))
        const = c1(shape, params.alphas, v, d)
        lprod = 1.0
        for kind, k in zip(params.sv_kinds, v):
            if k:
                lprod *= slowly_varying(kind, r) ** k
        total += cv * cv / v_factorial(v) * const * r ** (2 * d - s) * lprod
    return shape.area ** 2 * total


# ----------------------------------------------------------------------------
# dominant components and limit weights
# ----------------------------------------------------------------------------

def _sv_ratio_limit(kind_i, kind_j):
    # lim L_i / L_j for the supported kinds; None when the limit does not exist
    if kind_i == kind_j:
        return 1.0
    return None


def dominant_components(params, rel_tol=1e-12):
    """Dominant components as [(j, a_{j,j1*}), ...], j1* the first of them.

    A component is dominant when its exponent is minimal and its slowly
    varying factor has a finite limit ratio against every other minimal
    component.  Raises NoDominantComponent when no component qualifies.
    """
    amin = min(params.alphas)
    tied = [j for j, a in enumerate(params.alphas) if abs(a - amin) <= rel_tol * amin]
    dom = [j for j in tied
           if all(_sv_ratio_limit(params.sv_kinds[i], params.sv_kinds[j]) is not None
                  for i in tied if i != j)]
    if not dom:
        raise NoDominantComponent(
            "components %s share the minimal exponent %g but their slowly varying "
            "factors have no limit ratio" % (tied, amin))
    j1 = dom[0]
    return [(j, _sv_ratio_limit(params.sv_kinds[j], params.sv_kinds[j1])) for j in dom]


def theorem5_weights(params, dominants):
    """q_j = a_j/n for numerator components, -a_j/(m-n) for denominator ones."""
    if not dominants:
        raise DomainError("empty dominant set")
    n, m = params.n, params.m
    return {j: (a / n if j < n else -a / (m - n)) for j, a in dominants}


# ----------------------------------------------------------------------------
# brute-force checks of the multi-index inequalities
# ----------------------------------------------------------------------------

@dataclass
class Lemma2Report:
    alphas: tuple
    l0: int
    k_l0: tuple
    l_max: int
    delta: float
    min_gap: float
    argmin: tuple
    n_checked: int
    # strict: every gap > 0;  bound: every gap >= delta (up to rounding);
    # spread: max alpha / min alpha <= 1 + 1/l0
    strict_holds: bool
    bound_holds: bool
    spread_holds: bool
    gaps: dict = field(default_factory=dict, repr=False)

    @property
    def holds(self):
        return self.strict_holds and self.bound_holds


def _hypothesis(alphas, l0, k_l0):
    if sum(k_l0) != l0 or len(k_l0) != len(alphas) or min(k_l0) < 0:
        raise DomainError("k_l0 must be a multi-index of order l0 with one entry per component")
    lhs = sum(a * k for a, k in zip(alphas, k_l0))
    rhs = (l0 + 1) * min(alphas)
    if not lhs < rhs:
        raise HypothesisFailed(
            "sum alpha_j k_j = %.6g is not below (l0+1) min alpha = %.6g for k = %s"
            % (lhs, rhs, tuple(k_l0)), lhs=lhs, rhs=rhs, index=tuple(k_l0))
    return lhs, rhs


def check_lemma2(alphas, l0, k_l0, l_max, tol=1e-12):
    """Enumerate every k_l of order l0 < l <= l_max and compare exponent sums.

    Checks sum alpha_j k_{j,l} - sum alpha_j k_{j,l0} > 0 and >= delta with
    delta = (l0+1) min alpha - sum alpha_j k_{j,l0}.  The bound is attained
    when k_l piles l0+1 quanta on a minimal-exponent component, so it is
    checked as a non-strict inequality.
    """
    alphas = tuple(float(a) for a in alphas)
    k_l0 = tuple(int(k) for k in k_l0)
    base, rhs = _hypothesis(alphas, l0, k_l0)
    delta = rhs - base
    gaps = {}
    for l in range(l0 + 1, l_max + 1):
        for v in enumerate_multiindices(len(alphas), l):
            gaps[v] = sum(a * k for a, k in zip(alphas, v)) - base
    if gaps:
        argmin = min(gaps, key=gaps.get)
        min_gap = gaps[argmin]
    else:
        argmin, min_gap = None, math.inf
    scale = max(1.0, abs(base))
    return Lemma2Report(
        alphas=alphas, l0=l0, k_l0=k_l0, l_max=l_max, delta=delta, min_gap=min_gap,
        argmin=argmin, n_checked=len(gaps),
        strict_holds=all(g > 0 for g in gaps.values()),
        bound_holds=all(g >= delta - tol * scale for g in gaps.values()),
        spread_holds=max(alphas) / min(alphas) <= 1.0 + 1.0 / l0,
        gaps=gaps,
    )


def check_lemma2_support(alphas, l0, support, l_max, tol=1e-12):
    """Run :func:`check_lemma2` for every rank-level index in ``support``.

    ``support`` lists the multi-indices of order l0 with nonzero
    coefficient; the first one violating the hypothesis raises.
    """
    return [check_lemma2(alphas, l0, v, l_max, tol) for v in support]


@dataclass
class Lemma3Report:
    z_grid: np.ndarray
    sup_ratio: float
    ratio_at_zero: float
    ratio_at_max: float
    worst_index: tuple
    bounded: bool
    vanishing: bool
    ratios: dict = field(default_factory=dict, repr=False)


def check_lemma3(alphas, sv_kinds, l0, k_l0, l_max, z_grid=None, tail_tol=1e-3):
    """Evaluate prod B_j^{k_l}(z) / prod B_j^{k_l0}(z) on a grid for every k_l, l0 < l <= l_max.

    B_j is the power-law covariance (1+z^2)^(-alpha_j/2) L_j(z).  Reports
    the supremum over the grid and the value at its largest point.
    """
    alphas = tuple(float(a) for a in alphas)
    if sv_kinds is None:
        sv_kinds = (SVKind.CONSTANT_ONE,) * len(alphas)
    k_l0 = tuple(int(k) for k in k_l0)
    _hypothesis(alphas, l0, k_l0)
    if z_grid is None:
        z_grid = np.concatenate([[0.0], np.logspace(-3, 6, 400)])
    z_grid = np.asarray(z_grid, dtype=float)
    logb = np.array([np.log(evaluate(powerlaw_sv(a, kind), z_grid))
                     for a, kind in zip(alphas, sv_kinds)])
    log_base = np.tensordot(np.array(k_l0, dtype=float), logb, axes=1)
    ratios = {}
    for l in range(l0 + 1, l_max + 1):
        for v in enumerate_multiindices(len(alphas), l):
            ratios[v] = np.exp(np.tensordot(np.array(v, dtype=float), logb, axes=1) - log_base)
    sups = {v: float(r.max()) for v, r in ratios.items()}
    worst = max(sups, key=sups.get)
    at_zero = max(float(r[0]) for r in ratios.values())
    at_max = max(float(r[-1]) for r in ratios.values())
    sup = sups[worst]
    return Lemma3Report(z_grid=z_grid, sup_ratio=sup, ratio_at_zero=at_zero,
                        ratio_at_max=at_max, worst_index=worst,
                        bounded=bool(np.isfinite(sup)), vanishing=at_max < tail_tol,
                        ratios=ratios)
