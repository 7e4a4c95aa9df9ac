"""
Isotropic covariance models with declared long-range parameters.

A model is an immutable value; ``evaluate`` maps a distance (scalar or
array) to a correlation with B(0) = 1.

>>> m = cauchy(0.5)
>>> round(evaluate(m, 1.0), 7)
0.8408964
"""

import math
import re
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .specialfuns import DomainError, bessel_j, gamma

__all__ = [
    "Kind",
    "SVKind",
    "CovarianceModel",
    "LrdParams",
    "cauchy",
    "bessel",
    "sqexp",
    "powerlaw_sv",
    "evaluate",
    "slowly_varying",
    "c2",
    "lrd_flag",
    "lrd_params",
    "parse_model",
    "format_model",
]


class Kind(str, Enum):
    CAUCHY = "cauchy"
    BESSEL = "bessel"
    SQEXP = "sqexp"
    POWERLAW_SV = "powerlaw_sv"


class SVKind(str, Enum):
    CONSTANT_ONE = "one"
    LOG_OSCILLATING = "log_oscillating"


@dataclass(frozen=True)
class CovarianceModel:
    """Isotropic correlation function B(r) of a unit-variance field.

    ``alpha`` is the power-law decay exponent (Cauchy, power law), ``nu``
    the Bessel order.  ``sv`` is the slowly varying factor multiplying
    r^-alpha in the tail.
    """

    kind: Kind
    alpha: float = float("nan")
    nu: float = float("nan")
    sv: SVKind = SVKind.CONSTANT_ONE

    def __post_init__(self):
        if self.kind in (Kind.CAUCHY, Kind.POWERLAW_SV):
            if not self.alpha > 0:
                raise DomainError("%s model needs alpha > 0" % self.kind.value)
        if self.kind is Kind.BESSEL:
            if not 0.0 <= self.nu < 0.5:
                raise DomainError("Bessel model needs 0 <= nu < 1/2, got %r" % self.nu)
        if self.kind is Kind.CAUCHY and self.sv is not SVKind.CONSTANT_ONE:
            raise DomainError("Cauchy model has tail constant 1 (sv=one)")

    def __str__(self):
        return format_model(self)


@dataclass(frozen=True)
class LrdParams:
    alpha: float
    sv: SVKind = SVKind.CONSTANT_ONE
    d: int = 2


def cauchy(alpha):
    return CovarianceModel(Kind.CAUCHY, alpha=float(alpha))


def bessel(nu=0.0):
    return CovarianceModel(Kind.BESSEL, nu=float(nu))


def sqexp():
    return CovarianceModel(Kind.SQEXP)


def powerlaw_sv(alpha, sv=SVKind.CONSTANT_ONE):
    return CovarianceModel(Kind.POWERLAW_SV, alpha=float(alpha), sv=SVKind(sv))


# ----------------------------------------------------------------------------

def slowly_varying(sv_kind, r):
    """Slowly varying factor L(r), r > 0.

    ``LOG_OSCILLATING`` is exp((log r)^(1/3) cos((log r)^(1/3))) for r > 1
    and 1 on (0, 1]; its liminf is 0 and its limsup is infinite.
    """
    sv_kind = SVKind(sv_kind)
    r_arr = np.asarray(r, dtype=float)
    if np.any(~(r_arr > 0)):
        raise DomainError("slowly_varying requires r > 0")
    if sv_kind is SVKind.CONSTANT_ONE:
        out = np.ones_like(r_arr)
    else:
        lr = np.log(np.maximum(r_arr, 1.0))
        c = np.cbrt(lr)
        out = np.exp(c * np.cos(c))
    return float(out) if out.ndim == 0 else out


def _powerlaw_sv(model, r):
    # r^-alpha L(r) is only a tail form; (1 + r^2)^(-alpha/2) L(max(r,1))
    # keeps B(0) = 1 with the same asymptotics.
    base = np.power(1.0 + r * r, -0.5 * model.alpha)
    if model.sv is SVKind.CONSTANT_ONE:
        return base
    lv = slowly_varying(model.sv, np.maximum(r, 1.0))
    # bounded by 1 as required of a correlation: L grows slower than any power
    return np.minimum(base * lv, 1.0)


def evaluate(model, r):
    """B(r) for distance(s) r >= 0; returns a float for scalar input."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0) or np.any(np.isnan(r_arr)):
        raise DomainError("covariance evaluated at negative distance")
    kind = model.kind
    if kind is Kind.CAUCHY:
        out = np.power(1.0 + r_arr * r_arr, -0.5 * model.alpha)
    elif kind is Kind.SQEXP:
        out = np.exp(-r_arr * r_arr)
    elif kind is Kind.BESSEL:
        nu = model.nu
        if nu == 0.0:
            out = np.asarray(bessel_j(0.0, r_arr), dtype=float)
        else:
            safe = np.where(r_arr > 0, r_arr, 1.0)
            out = 2.0 ** nu * gamma(nu + 1.0) * np.asarray(bessel_j(nu, safe)) / safe ** nu
            out = np.where(r_arr > 0, out, 1.0)
    elif kind is Kind.POWERLAW_SV:
        out = _powerlaw_sv(model, r_arr)
    else:  # pragma: no cover
        raise ValueError(kind)
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


def c2(d, alpha):
    """Spectral constant Gamma((d-a)/2) / (2^a pi^(d/2) Gamma(a/2)), 0 < a < d."""
    if not 0.0 < alpha < d:
        raise DomainError("c2 requires 0 < alpha < d (alpha=%r, d=%r)" % (alpha, d))
    return gamma(0.5 * (d - alpha)) / (2.0 ** alpha * math.pi ** (0.5 * d) * gamma(0.5 * alpha))


def lrd_flag(model, d=2):
    """True when the model's covariance is non-integrable over R^d."""
    if model.kind in (Kind.CAUCHY, Kind.POWERLAW_SV):
        return 0.0 < model.alpha < d
    if model.kind is Kind.BESSEL:
        # |B| ~ r^-(nu+1/2) decays slower than r^-2 only for these orders in the plane
        return d == 2 and 0.0 <= model.nu < 0.5
    return False


def lrd_params(model, d=2):
    """(alpha, L) decomposition of the tail; Bessel and sqexp have none."""
    if model.kind is Kind.BESSEL:
        raise DomainError("the Bessel model has no alpha/L tail decomposition")
    if model.kind is Kind.SQEXP:
        raise DomainError("the squared-exponential model is short-range")
    return LrdParams(alpha=model.alpha, sv=model.sv, d=d)


# ----------------------------------------------------------------------------
# text form used in configuration files: "kind=cauchy alpha=0.65"

_TOKEN = re.compile(r"(\w+)\s*=\s*([^\s,]+)")


def parse_model(text):
    fields = dict(_TOKEN.findall(text))
    if "kind" not in fields:
        raise ValueError("model spec %r lacks kind=" % text)
    kind = Kind(fields.pop("kind").lower())
    if kind is Kind.CAUCHY:
        model = cauchy(float(fields.pop("alpha")))
    elif kind is Kind.BESSEL:
        model = bessel(float(fields.pop("nu", 0.0)))
    elif kind is Kind.SQEXP:
        model = sqexp()
    else:
        model = powerlaw_sv(float(fields.pop("alpha")), SVKind(fields.pop("sv", "one")))
    if fields:
        raise ValueError("unknown model parameters: %s" % ", ".join(sorted(fields)))
    return model


def format_model(model):
    if model.kind is Kind.CAUCHY:
        return "kind=cauchy alpha=%g" % model.alpha
    if model.kind is Kind.BESSEL:
        return "kind=bessel nu=%g" % model.nu
    if model.kind is Kind.SQEXP:
        return "kind=sqexp"
    return "kind=powerlaw_sv alpha=%g sv=%s" % (model.alpha, model.sv.value)
