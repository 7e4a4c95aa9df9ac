"""
Monte Carlo experiment driver for sojourn areas of Fisher-Snedecor fields.

An experiment has one or more arms, each a vector-field specification
simulated ``n_realizations`` times on a common grid; every realization
gives one excursion area at level ``a``.  Arms are compared pairwise by
two-sample Kolmogorov-Smirnov statistics and Q-Q data.

Seeding: arm k of an experiment with master seed S uses the realization
seeds ``realization_seed(S, k, i)``; component j of realization i then
draws from stream (seed_i, j).  A single realization can therefore be
regenerated from the ``seed`` column of ``arms.csv`` alone, and arms
are statistically independent of one another.
"""

import csv
import json
import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from scipy.special import ndtri

from .covariance import bessel, cauchy, format_model, lrd_params, parse_model, sqexp
from .fieldsim import (EmbeddingNotPD, LatticeSpec, VectorFieldSpec, f_cdf,
                       fisher_snedecor_field, simulate_vector)
from .hermite import closed_form_cv_f_indicator, enumerate_multiindices
from .minkowski import centered_sojourn, empirical_krk2, excursion_area
from .reduction import UNIT_SQUARE, ComponentParams, var_krk_asymptote

__all__ = [
    "ConfigError",
    "CaseId",
    "ExperimentConfig",
    "ArmResult",
    "case_config",
    "realization_seed",
    "run_experiment",
    "write_experiment",
    "ks_two_sample",
    "ks_critical",
    "standardize",
    "qq_data",
    "normal_qq_data",
    "ScalingRow",
    "variance_scaling_report",
    "write_scaling_report",
]

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


class CaseId(str, Enum):
    CASE1 = "case1"
    CASE2 = "case2"
    CASE3 = "case3"
    CUSTOM = "custom"


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved experiment: arms (label -> VectorFieldSpec) on one grid and level."""

    case_id: CaseId
    grid: LatticeSpec
    arms: tuple  # ((label, VectorFieldSpec), ...)
    level: float = 1.0
    n_realizations: int = 200
    master_seed: int = 20180330
    comparisons: tuple = ()
    output_dir: str = None
    method: str = "auto"
    n_workers: int = 1

    def __post_init__(self):
        if self.n_realizations < 2:
            raise ConfigError("need at least 2 realizations")
        labels = [lab for lab, _ in self.arms]
        if len(set(labels)) != len(labels):
            raise ConfigError("arm labels must be unique")
        for x, y in self.comparisons:
            if x not in labels or y not in labels:
                raise ConfigError("comparison %s vs %s names an unknown arm" % (x, y))

    @property
    def arm_labels(self):
        return [lab for lab, _ in self.arms]

    def arm(self, label):
        return dict(self.arms)[label]

    def to_dict(self):
        return {
            "case": self.case_id.value,
            "grid": {"n_x": self.grid.n_x, "n_y": self.grid.n_y, "dx": self.grid.dx},
            "level": self.level,
            "n_realizations": self.n_realizations,
            "master_seed": self.master_seed,
            "method": self.method,
            "arms": {lab: {"n": v.n, "components": [format_model(c) for c in v.components]}
                     for lab, v in self.arms},
            "comparisons": [list(c) for c in self.comparisons],
        }

    @classmethod
    def from_dict(cls, d, **overrides):
        try:
            g = d.get("grid", {})
            if isinstance(g, int):
                g = {"n_x": g, "n_y": g}
            grid = LatticeSpec(int(g.get("n_x", 128)), int(g.get("n_y", g.get("n_x", 128))),
                               float(g.get("dx", 1.0)))
            arms = tuple((lab, VectorFieldSpec(tuple(parse_model(s) for s in a["components"]),
                                               int(a.get("n", 1))))
                         for lab, a in d["arms"].items())
            cfg = cls(case_id=CaseId(d.get("case", "custom")), grid=grid, arms=arms,
                      level=float(d.get("level", 1.0)),
                      n_realizations=int(d.get("n_realizations", 200)),
                      master_seed=int(d.get("master_seed", 20180330)),
                      comparisons=tuple(tuple(c) for c in d.get("comparisons", ())),
                      method=d.get("method", "auto"))
        except (KeyError, TypeError) as exc:
            raise ConfigError("malformed experiment config: %s" % exc) from exc
        return replace(cfg, **overrides) if overrides else cfg


def _uniform(model, m=3, n=1):
    return VectorFieldSpec((model,) * m, n)


def case_config(case, grid=128, reps=200, seed=20180330, dx=1.0, level=1.0, **kw):
    """Preset arms for the three simulation cases (F_{1,2} fields, level 1 by default).

    case1/case2: arm ``b`` has distinct Cauchy exponents, arms ``a_<alpha>``
    use one exponent for all three components.  case3: Cauchy(0.5) arm
    ``a`` against Bessel(0) arm ``c``.
    """
    case = CaseId(case if not isinstance(case, int) else "case%d" % case)
    spec = LatticeSpec(grid, grid, dx)
    if case in (CaseId.CASE1, CaseId.CASE2):
        alphas = (0.65, 0.8, 0.9) if case is CaseId.CASE1 else (0.1, 0.5, 0.9)
        arms = [("b", VectorFieldSpec(tuple(cauchy(a) for a in alphas), 1))]
        arms += [("a_%g" % a, _uniform(cauchy(a))) for a in alphas]
        comparisons = tuple(("b", "a_%g" % a) for a in alphas)
    elif case is CaseId.CASE3:
        arms = [("a", _uniform(cauchy(0.5))), ("c", _uniform(bessel(0.0)))]
        comparisons = (("a", "c"),)
    else:
        raise ConfigError("custom experiments are built from a config file")
    return ExperimentConfig(case_id=case, grid=spec, arms=tuple(arms), level=level,
                            n_realizations=reps, master_seed=seed,
                            comparisons=comparisons, **kw)


# ----------------------------------------------------------------------------
# running
# ----------------------------------------------------------------------------

def realization_seed(master_seed, arm_index, i):
    """64-bit seed of realization i in arm ``arm_index``."""
    ss = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFFFFFFFFFF, int(arm_index), int(i)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class ArmResult:
    label: str
    areas: np.ndarray  # realization order
    fractions: np.ndarray
    seeds: list
    failures: int = 0
    clipped_cells: int = 0

    @property
    def sorted_areas(self):
        return np.sort(self.areas)

    @property
    def mean(self):
        return float(np.mean(self.areas))

    @property
    def variance(self):
        return float(np.var(self.areas, ddof=1))


def _one_realization(args):
    grid, vspec, seed, level, method = args
    comps = simulate_vector(grid, vspec, seed, method=method)
    fld = fisher_snedecor_field(comps, vspec.n)
    s = excursion_area(fld, level)
    return s.area, s.fraction, s.clipped_cells


def _map(fn, items, n_workers):
    if n_workers and n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            return list(pool.map(fn, items, chunksize=8))
    return [fn(x) for x in items]


def run_experiment(config):
    """Simulate every arm; results are fully determined by ``config.master_seed``.

    An arm whose embedding fails is returned empty with ``failures`` set
    to the number of realizations; the exception is logged.
    """
    results = []
    for k, (label, vspec) in enumerate(config.arms):
        seeds = [realization_seed(config.master_seed, k, i) for i in range(config.n_realizations)]
        try:
            out = _map(_one_realization,
                       [(config.grid, vspec, s, config.level, config.method) for s in seeds],
                       config.n_workers)
        except EmbeddingNotPD as exc:
            log.error("arm %s aborted: %s", label, exc)
            results.append(ArmResult(label, np.array([]), np.array([]), [],
                                     failures=len(seeds)))
            continue
        areas = np.array([o[0] for o in out])
        fractions = np.array([o[1] for o in out])
        results.append(ArmResult(label, areas, fractions, seeds,
                                 clipped_cells=int(sum(o[2] for o in out))))
    return results


# ----------------------------------------------------------------------------
# two-sample statistics
# ----------------------------------------------------------------------------

def _kolmogorov_sf(lam):
    # P(K > lam) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lam^2)
    if lam <= 0.0:
        return 1.0
    if lam < 0.2:
        return 1.0
    total = 0.0
    for k in range(1, 101):
        term = math.exp(-2.0 * k * k * lam * lam)
        total += term if k % 2 else -term
        if term < 1e-16:
            break
    return min(1.0, max(0.0, 2.0 * total))


def ks_two_sample(x, y):
    """Sup distance between empirical cdfs and its asymptotic p-value."""
    x = np.sort(np.asarray(x, dtype=float))
    y = np.sort(np.asarray(y, dtype=float))
    if x.size == 0 or y.size == 0:
        raise ValueError("KS statistic needs two nonempty samples")
    pts = np.concatenate([x, y])
    cdf_x = np.searchsorted(x, pts, side="right") / x.size
    cdf_y = np.searchsorted(y, pts, side="right") / y.size
    d = float(np.max(np.abs(cdf_x - cdf_y)))
    n_eff = x.size * y.size / (x.size + y.size)
    return d, _kolmogorov_sf(math.sqrt(n_eff) * d)


def ks_critical(n, m, c_alpha=1.358):
    """Asymptotic two-sample critical value; c_alpha = 1.358 is the 5% level."""
    return c_alpha * math.sqrt((n + m) / (n * m))


def standardize(x):
    x = np.asarray(x, dtype=float)
    sd = x.std(ddof=1)
    if sd == 0:
        raise ValueError("cannot standardize a constant sample")
    return (x - x.mean()) / sd


def qq_data(x, y):
    """Matched quantiles at probabilities (i - 0.5)/N, N = min(len x, len y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size == 0 or y.size == 0:
        raise ValueError("Q-Q data needs two nonempty samples")
    n = min(x.size, y.size)
    p = (np.arange(1, n + 1) - 0.5) / n
    return np.column_stack([np.quantile(x, p, method="hazen"), np.quantile(y, p, method="hazen")])


def normal_qq_data(x):
    """(standard normal quantile, standardized order statistic) pairs."""
    x = np.sort(np.asarray(x, dtype=float))
    if x.size == 0:
        raise ValueError("normal Q-Q data needs a nonempty sample")
    z = ndtri((np.arange(1, x.size + 1) - 0.5) / x.size)
    sd = x.std(ddof=1) if x.size > 1 else 0.0
    if sd == 0:
        warnings.warn("zero-variance sample: normal Q-Q line is degenerate", RuntimeWarning)
        return np.column_stack([z, x - x.mean()])
    return np.column_stack([z, (x - x.mean()) / sd])


# ----------------------------------------------------------------------------
# outputs
# ----------------------------------------------------------------------------

def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_experiment(config, results, out_dir=None):
    """arms.csv, ks.csv, qq_<x>_<y>.csv and config.echo; returns the KS table."""
    out_dir = out_dir or config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    for res in results:
        for s, area, frac in zip(res.seeds, res.areas, res.fractions):
            rows.append((res.label, s, repr(float(area)), repr(float(frac))))
    _write_csv(os.path.join(out_dir, "arms.csv"), ["arm", "seed", "area", "fraction"], rows)
    by_label = {r.label: r for r in results}
    ks_rows = []
    for x, y in config.comparisons:
        ax, ay = by_label[x].areas, by_label[y].areas
        if ax.size < 2 or ay.size < 2:
            continue
        d, p = ks_two_sample(standardize(ax), standardize(ay))
        d_raw, p_raw = ks_two_sample(ax, ay)
        ks_rows.append((x, y, d, p, d_raw, p_raw, ks_critical(ax.size, ay.size)))
        _write_csv(os.path.join(out_dir, "qq_%s_%s.csv" % (x, y)), ["q_x", "q_y"],
                   [("%.17g" % a, "%.17g" % b) for a, b in qq_data(ax, ay)])
    _write_csv(os.path.join(out_dir, "ks.csv"),
               ["arm_x", "arm_y", "statistic", "p", "raw_statistic", "raw_p", "critical_5pct"],
               [(x, y, "%.10g" % d, "%.6g" % p, "%.10g" % dr, "%.6g" % pr, "%.6g" % c)
                for x, y, d, p, dr, pr, c in ks_rows])
    with open(os.path.join(out_dir, "config.echo"), "w") as fh:
        json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return ks_rows


# ----------------------------------------------------------------------------
# variance scaling
# ----------------------------------------------------------------------------

@dataclass
class ScalingRow:
    r: int
    var_sojourn: float
    var_krk2: float
    ratio: float  # Var K_{r,2} / Var(centred sojourn)
    ratio_se: float
    analytic: float
    correlation: float
    correlation_se: float


def _subwindow(values, r):
    n_x, n_y = values.shape
    i0 = (n_x - r) // 2
    j0 = (n_y - r) // 2
    return values[i0:i0 + r, j0:j0 + r]


def variance_scaling_report(config, r_list, arm="b", n_boot=400):
    """Var of the centred sojourn and of its rank-2 projection across window sizes.

    Each realization is simulated once on the full grid; window r uses the
    central r x r block, so all sizes are nested windows of the same fields.
    The analytic column is the leading-order Var K_{r,2} for a square of
    side r dx.
    """
    r_list = sorted(int(r) for r in r_list)
    if len(r_list) < 3:
        raise ConfigError("variance scaling needs at least three window sizes")
    if r_list[-1] > min(config.grid.n_x, config.grid.n_y):
        raise ConfigError("largest window exceeds the grid")
    k = config.arm_labels.index(arm)
    vspec = config.arm(arm)
    n_f, m_f = vspec.n, vspec.m
    a = config.level
    dx = config.grid.dx
    soj = np.empty((config.n_realizations, len(r_list)))
    krk = np.empty_like(soj)
    for i in range(config.n_realizations):
        seed = realization_seed(config.master_seed, k, i)
        comps = simulate_vector(config.grid, vspec, seed, method=config.method)
        fld = fisher_snedecor_field(comps, n_f)
        for t, r in enumerate(r_list):
            sub_f = replace(fld, values=_subwindow(fld.values, r))
            soj[i, t] = centered_sojourn(sub_f, a, n_f, m_f, dx=dx)
            sub_c = [replace(c, values=_subwindow(c.values, r)) for c in comps]
            krk[i, t] = empirical_krk2(sub_c, n_f, m_f, a, dx=dx)

    try:
        params = ComponentParams(tuple(lrd_params(c).alpha for c in vspec.components),
                                 tuple(lrd_params(c).sv for c in vspec.components), n=n_f, a=a)
        coeffs = {v: closed_form_cv_f_indicator(v, a, n_f, m_f)
                  for v in enumerate_multiindices(m_f, 2)}
        analytic = [var_krk_asymptote(params, UNIT_SQUARE, 2, coeffs, r * dx) for r in r_list]
    except Exception as exc:  # Bessel arms and divergent constants have no asymptote
        log.info("no analytic variance column: %s", exc)
        analytic = [float("nan")] * len(r_list)

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([config.master_seed, 7919])))
    boot = rng.integers(0, config.n_realizations, size=(n_boot, config.n_realizations))
    rows = []
    for t, r in enumerate(r_list):
        x, y = soj[:, t], krk[:, t]
        vx, vy = x.var(ddof=1), y.var(ddof=1)
        corr = float(np.corrcoef(x, y)[0, 1])
        bx, by = x[boot], y[boot]
        bvx, bvy = bx.var(axis=1, ddof=1), by.var(axis=1, ddof=1)
        bcov = ((bx - bx.mean(axis=1, keepdims=True)) * (by - by.mean(axis=1, keepdims=True))).sum(axis=1) / (config.n_realizations - 1)
        rows.append(ScalingRow(r=r, var_sojourn=float(vx), var_krk2=float(vy), ratio=float(vy / vx),
                               ratio_se=float(np.std(bvy / bvx, ddof=1)),
                               analytic=float(analytic[t]), correlation=corr,
                               correlation_se=float(np.std(bcov / np.sqrt(bvx * bvy), ddof=1))))
    return rows


def write_scaling_report(path, rows):
    _write_csv(path, ["r", "var_sojourn", "var_krk2", "ratio", "ratio_se", "analytic",
                      "correlation", "correlation_se"],
               [(r.r, "%.10g" % r.var_sojourn, "%.10g" % r.var_krk2, "%.6g" % r.ratio,
                 "%.3g" % r.ratio_se, "%.10g" % r.analytic, "%.6g" % r.correlation,
                 "%.3g" % r.correlation_se) for r in rows])
