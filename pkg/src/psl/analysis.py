"""Expected scores, propriety checking, witnesses, and transformation flips.

This module holds the machinery that turns pointwise scores into
statements about forecast systems:

- ``expected_score`` / ``relative_expected_score``: the long-run mean
  score when outcomes are drawn from a known truth density, and the
  difference between two systems (negative favours the first).
- ``inverse_width_skill_curve``: relative expected scores for the
  classic pair N(0, sigma^2) versus N(0, 1/sigma^2) judged under a
  standard Gaussian truth, swept over sigma.
- ``propriety_check``: a falsification harness for the propriety
  inequality E_q[S(p)] >= E_q[S(q)] over sampled density pairs.
- ``construct_witness`` / ``verify_witness``: build and check concrete
  (p1, p2, y) triples where one forecast assigns r times the density of
  the other at the outcome yet receives the worse score.
- ``transformed_relative_score`` / ``find_preference_flip``: how score
  differences behave when both forecasts and the outcome are pushed
  through a monotone change of variables.
- ``crps_argmin_outcome``: the outcome that minimises the CRPS of a
  fixed forecast, which lands on the forecast median no matter how
  little density sits there.

Expected scores for the quadrature families are evaluated through
single-integral identities (for instance the CRPS expectation reduces to
integral((F_p - F_q)^2) + integral(F_q (1 - F_q))); the test suite
validates each identity against a directly nested integral of the
pointwise score.  The energy family has no quadrature path and uses
paired-stream Monte Carlo throughout, except in ``propriety_check``
where margins down at 1e-7 demand the deterministic closed form
(``expected_energy_score_exact``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.special import gamma, hyp1f1

from .distributions import (
    GaussianMixture,
    PiecewiseUniform,
    Transform,
    density_to_json,
    gaussian,
    gaussian_mixture,
    lp_norm_integral,
    pushforward,
)
from .quadrature import integrate
from .scores import ScoreSpec, ScoreValue, score

__all__ = [
    "SkillCurve", "WitnessReport", "FlipReport",
    "ProprietyFinding", "ProprietyReport",
    "expected_score", "relative_expected_score",
    "inverse_width_skill_curve",
    "propriety_check", "default_propriety_pairs", "l1_distance",
    "expected_energy_score_exact", "gaussian_abs_moment",
    "verify_witness", "construct_witness",
    "relative_score_curve", "transformed_relative_score",
    "find_preference_flip", "sign_change_root",
    "crps_argmin_outcome",
    "median_pathology_pair", "power_pathology_pair",
    "spherical_pathology_pair", "transform_flip_pair",
    "inverse_width_pair",
]

_SQRT2PI = math.sqrt(2.0 * math.pi)
_INV_LN2 = 1.0 / math.log(2.0)
_LOG_RATIO_TOL = 1e-9


def _encode_number(x: float):
    """JSON-safe float: infinities become labelled strings."""
    x = float(x)
    if math.isfinite(x):
        return x
    if math.isnan(x):
        return "nan"
    return "infinity" if x > 0 else "-infinity"


def _score_value_json(v: ScoreValue) -> dict:
    out = {"value": _encode_number(v.value)}
    if v.stderr is not None:
        out["stderr"] = _encode_number(v.stderr)
    if v.infinite:
        out["infinite"] = True
    return out


def _envelope(*densities):
    """Union support interval and merged interior seed points."""
    lo = min(d.support()[0] for d in densities)
    hi = max(d.support()[1] for d in densities)
    seeds = set()
    for d in densities:
        seeds.update(d.quad_seed_points())
    return lo, hi, tuple(sorted(seeds))


class _InfiniteIgnorance(Exception):
    """Signal that the truth puts mass where the forecast has none."""


# ---------------------------------------------------------------------------
# Expected and relative expected scores
# ---------------------------------------------------------------------------

def expected_score(spec: ScoreSpec, forecast, truth, *,
                   abs_tol: float = 1e-10, rel_tol: float = 1e-9,
                   seed: Optional[int] = None,
                   n: int = 1_000_000) -> ScoreValue:
    """Mean score of ``forecast`` when outcomes are drawn from ``truth``.

    Every family except energy is computed by deterministic quadrature
    over the union of both supports.  The energy family draws ``n``
    paired Monte-Carlo samples (two independent streams from the
    forecast, one from the truth) and reports a standard error; it
    requires an explicit ``seed``.
    """
    fam = spec.family
    if fam == "energy":
        if seed is None:
            raise ValueError("expected energy score requires an explicit seed")
        ss = (seed if isinstance(seed, np.random.SeedSequence)
              else np.random.SeedSequence(seed))
        s1, s2, s3 = ss.spawn(3)
        x = forecast.sample(s1, n)
        x2 = forecast.sample(s2, n)
        yv = truth.sample(s3, n)
        contrib = (np.abs(x - yv) ** spec.beta
                   - 0.5 * np.abs(x - x2) ** spec.beta)
        value = float(np.mean(contrib))
        stderr = float(np.std(contrib, ddof=1) / math.sqrt(n))
        return ScoreValue(value, stderr=stderr)

    lo, hi, seeds = _envelope(forecast, truth)

    if fam == "ignorance":
        def f(x):
            q = np.asarray(truth.pdf(x), dtype=float)
            out = np.zeros_like(q)
            m = q > 0.0
            if np.any(m):
                lp = np.asarray(forecast.log_pdf(np.asarray(x)[m]),
                                dtype=float)
                if np.any(np.isinf(lp)):
                    raise _InfiniteIgnorance
                out[m] = -lp * q[m] * _INV_LN2
            return out
        try:
            res = integrate(f, lo, hi, abs_tol=abs_tol, rel_tol=rel_tol,
                            seed_points=seeds)
        except _InfiniteIgnorance:
            return ScoreValue(math.inf, infinite=True)
        return ScoreValue(res.value)

    if fam == "crps":
        def f(x):
            fp = np.asarray(forecast.cdf(x), dtype=float)
            fq = np.asarray(truth.cdf(x), dtype=float)
            return (fp - fq) ** 2 + fq * (1.0 - fq)
        res = integrate(f, lo, hi, abs_tol=abs_tol, rel_tol=rel_tol,
                        seed_points=seeds)
        return ScoreValue(res.value)

    if fam == "power":
        a = spec.alpha
        def f(x):
            return -a * np.asarray(forecast.pdf(x), dtype=float) ** (a - 1.0) \
                * np.asarray(truth.pdf(x), dtype=float)
        res = integrate(f, lo, hi, abs_tol=abs_tol, rel_tol=rel_tol,
                        seed_points=seeds)
        norm = lp_norm_integral(forecast, a)
        return ScoreValue(res.value + (a - 1.0) * norm)

    if fam == "pseudospherical":
        b = spec.beta
        def f(x):
            return -np.asarray(forecast.pdf(x), dtype=float) ** (b - 1.0) \
                * np.asarray(truth.pdf(x), dtype=float)
        res = integrate(f, lo, hi, abs_tol=abs_tol, rel_tol=rel_tol,
                        seed_points=seeds)
        norm = lp_norm_integral(forecast, b)
        return ScoreValue(res.value / norm ** ((b - 1.0) / b))

    if fam == "naive_linear":
        def f(x):
            return -np.asarray(forecast.pdf(x), dtype=float) \
                * np.asarray(truth.pdf(x), dtype=float)
        res = integrate(f, lo, hi, abs_tol=abs_tol, rel_tol=rel_tol,
                        seed_points=seeds)
        return ScoreValue(res.value)

    raise ValueError(f"unknown score family: {fam!r}")


def relative_expected_score(spec: ScoreSpec, system_a, system_b, truth, *,
                            abs_tol: float = 1e-10, rel_tol: float = 1e-9,
                            seed: Optional[int] = None,
                            n: int = 1_000_000) -> ScoreValue:
    """expected_score(A) - expected_score(B); negative favours A.

    Swapping the two systems negates the value exactly, because the same
    two expectations are computed and subtracted in the other order.
    For the energy family the two Monte-Carlo estimates use independent
    streams derived from ``seed`` and the standard errors combine in
    quadrature.
    """
    kw = dict(abs_tol=abs_tol, rel_tol=rel_tol, n=n)
    if spec.family == "energy":
        if seed is None:
            raise ValueError("expected energy score requires an explicit seed")
        sa, sb = np.random.SeedSequence(seed).spawn(2)
        a = expected_score(spec, system_a, truth, seed=sa, **kw)
        b = expected_score(spec, system_b, truth, seed=sb, **kw)
    else:
        a = expected_score(spec, system_a, truth, **kw)
        b = expected_score(spec, system_b, truth, **kw)
    stderr = None
    if a.stderr is not None or b.stderr is not None:
        stderr = math.hypot(a.stderr or 0.0, b.stderr or 0.0)
    return ScoreValue(a.value - b.value, stderr=stderr,
                      infinite=a.infinite or b.infinite)


# ---------------------------------------------------------------------------
# The inverse-width skill curve
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SkillCurve:
    """Relative expected scores on a parameter grid, one column per rule."""

    sigma: tuple
    columns: dict

    COLUMN_ORDER = ("ign", "ign_over_20", "crps", "pls", "sps")

    def __post_init__(self):
        grid = tuple(float(s) for s in self.sigma)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("sigma grid must be strictly increasing")
        object.__setattr__(self, "sigma", grid)
        cols = {k: tuple(float(v) for v in vs)
                for k, vs in self.columns.items()}
        for k, vs in cols.items():
            if len(vs) != len(grid):
                raise ValueError(f"column {k!r} length does not match grid")
        object.__setattr__(self, "columns", cols)

    def column_names(self):
        known = [c for c in self.COLUMN_ORDER if c in self.columns]
        extra = sorted(set(self.columns) - set(known))
        return tuple(known) + tuple(extra)

    def rows(self):
        names = self.column_names()
        for i, s in enumerate(self.sigma):
            yield (s,) + tuple(self.columns[c][i] for c in names)


def inverse_width_pair(sigma: float):
    """The reciprocal-width Gaussian pair N(0, sigma^2), N(0, 1/sigma^2)."""
    sigma = float(sigma)
    if sigma <= 1.0:
        raise ValueError("sigma must exceed 1 so the two widths differ")
    return gaussian(0.0, sigma), gaussian(0.0, 1.0 / sigma)


def inverse_width_skill_curve(sigma_grid: Sequence[float], *,
                              abs_tol: float = 1e-10,
                              rel_tol: float = 1e-9) -> SkillCurve:
    """Relative expected IGN/CRPS/PLS/SPS for the reciprocal-width pair.

    System A forecasts N(0, sigma^2), system B forecasts N(0, 1/sigma^2),
    and outcomes are drawn from a standard Gaussian.  The spherical score
    cannot separate the two systems (the sps column is zero to quadrature
    precision for every sigma), the ignorance and quadratic scores prefer
    the wide system A, and the CRPS prefers the narrow system B.  The
    ign_over_20 column repeats ign scaled by 1/20 for overlay plots.
    """
    grid = [float(s) for s in sigma_grid]
    if any(s <= 1.0 for s in grid):
        raise ValueError("sigma grid must lie strictly above 1")
    truth = gaussian(0.0, 1.0)
    specs = {
        "ign": ScoreSpec("ignorance"),
        "crps": ScoreSpec("crps"),
        "pls": ScoreSpec("power", alpha=2.0),
        "sps": ScoreSpec("pseudospherical", beta=2.0),
    }
    cols = {name: [] for name in specs}
    for s in grid:
        a, b = inverse_width_pair(s)
        for name, sp in specs.items():
            rel = relative_expected_score(sp, a, b, truth,
                                          abs_tol=abs_tol, rel_tol=rel_tol)
            cols[name].append(rel.value)
    cols["ign_over_20"] = [v / 20.0 for v in cols["ign"]]
    return SkillCurve(sigma=tuple(grid),
                      columns={k: tuple(v) for k, v in cols.items()})


# ---------------------------------------------------------------------------
# Propriety falsification
# ---------------------------------------------------------------------------

def l1_distance(p, q, *, abs_tol: float = 1e-8, rel_tol: float = 1e-8) -> float:
    """Integral of |p - q| over the union of both supports."""
    lo, hi, seeds = _envelope(p, q)
    def f(x):
        return np.abs(np.asarray(p.pdf(x), dtype=float)
                      - np.asarray(q.pdf(x), dtype=float))
    return integrate(f, lo, hi, abs_tol=abs_tol, rel_tol=rel_tol,
                     seed_points=seeds).value


def gaussian_abs_moment(mean: float, variance: float, beta: float) -> float:
    """E|X|^beta for X ~ N(mean, variance), via the confluent
    hypergeometric representation."""
    if variance <= 0.0:
        raise ValueError("variance must be positive")
    m2 = mean * mean / (2.0 * variance)
    return ((2.0 * variance) ** (0.5 * beta) * gamma(0.5 * (1.0 + beta))
            / math.sqrt(math.pi) * float(hyp1f1(-0.5 * beta, 0.5, -m2)))


def expected_energy_score_exact(forecast: GaussianMixture,
                                truth: GaussianMixture,
                                beta: float) -> float:
    """Closed-form expected energy score for Gaussian mixtures.

    Both the cross term E|x - y|^beta (x from the forecast, y from the
    truth) and the self term reduce to absolute moments of Gaussians,
    because differences of independent mixture draws are again mixtures.
    Used where Monte-Carlo noise would swamp the quantity of interest
    (propriety margins); the Monte-Carlo path in ``expected_score`` is
    cross-checked against this in the test suite.
    """
    if not isinstance(forecast, GaussianMixture) or not isinstance(truth, GaussianMixture):
        raise TypeError("closed-form expected energy score needs Gaussian mixtures")
    beta = float(beta)
    if not 0.0 < beta < 2.0:
        raise ValueError("energy score needs beta in (0, 2)")

    def pair_sum(da, db):
        total = 0.0
        for ca in da.components:
            for cb in db.components:
                total += ca.weight * cb.weight * gaussian_abs_moment(
                    ca.mean - cb.mean,
                    ca.stddev ** 2 + cb.stddev ** 2, beta)
        return total

    return pair_sum(forecast, truth) - 0.5 * pair_sum(forecast, forecast)


@dataclass(frozen=True)
class ProprietyFinding:
    """One (truth, candidate) margin from a propriety sweep."""

    truth: object
    candidate: object
    margin: float
    l1: float
    violation: bool
    reason: Optional[str] = None

    def to_json(self) -> dict:
        out = {
            "truth": density_to_json(self.truth),
            "candidate": density_to_json(self.candidate),
            "margin": _encode_number(self.margin),
            "l1_distance": _encode_number(self.l1),
            "violation": self.violation,
        }
        if self.reason:
            out["reason"] = self.reason
        return out


@dataclass(frozen=True)
class ProprietyReport:
    """Outcome of a propriety falsification sweep.

    ``passed`` means no sampled pair violated the inequality; it is
    evidence, not proof.  A violation is either an outright negative
    margin (below ``-tol``) or a margin that stays below
    ``strict_margin`` although the candidate is at least ``strict_l1``
    away from the truth in L1, which a strictly proper rule should
    separate decisively.
    """

    spec: ScoreSpec
    tol: float
    strict_l1: float
    strict_margin: float
    findings: tuple

    @property
    def violations(self):
        return tuple(f for f in self.findings if f.violation)

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def min_margin(self) -> float:
        margins = [f.margin for f in self.findings if f.l1 > 0.0]
        return min(margins) if margins else 0.0

    def to_json(self) -> dict:
        return {
            "score": self.spec.to_json(),
            "tol": self.tol,
            "strict_l1": self.strict_l1,
            "strict_margin": self.strict_margin,
            "pairs": len(self.findings),
            "min_margin": _encode_number(self.min_margin),
            "passed": self.passed,
            "violations": [f.to_json() for f in self.violations],
        }


def _random_gaussian(rng) -> GaussianMixture:
    return gaussian(rng.uniform(-3.0, 3.0), rng.uniform(0.2, 5.0))


def _random_two_mixture(rng) -> GaussianMixture:
    w = rng.uniform(0.2, 0.8)
    return gaussian_mixture([
        (w, rng.uniform(-3.0, 3.0), rng.uniform(0.2, 5.0)),
        (1.0 - w, rng.uniform(-3.0, 3.0), rng.uniform(0.2, 5.0)),
    ])


def default_propriety_pairs(seed: int, n_pairs: int = 50):
    """Sampled (truth, [candidate]) pairs: Gaussians and two-component
    mixtures with means in [-3, 3] and widths in [0.2, 5]."""
    rng = np.random.default_rng(seed)
    pairs = []
    for i in range(n_pairs):
        draw = _random_gaussian if i % 2 == 0 else _random_two_mixture
        pairs.append((draw(rng), [draw(rng)]))
    return pairs


def counterexample_pair():
    """The pair that exposes the naive linear score: a truth-matching
    forecast loses to a spuriously narrow one."""
    return gaussian(0.0, 1.0), [gaussian(0.0, 0.5)]


def propriety_check(spec: ScoreSpec, pairs=None, *,
                    n_pairs: int = 50, seed: int = 0,
                    tol: float = 1e-7,
                    strict_l1: float = 0.05, strict_margin: float = 1e-4,
                    abs_tol: float = 1e-10, rel_tol: float = 1e-9,
                    mc_seed: Optional[int] = None,
                    n: int = 1_000_000) -> ProprietyReport:
    """Check E_q[S(p)] >= E_q[S(q)] over (truth, candidates) pairs.

    ``pairs`` is an iterable of (truth, candidate sequence); when
    omitted, the documented counterexample pair plus ``n_pairs`` sampled
    pairs (from ``default_propriety_pairs(seed)``) are used.  The truth
    itself is always evaluated as a candidate, so the equality case is
    exercised on every pair.  Violations are findings, not errors: the
    report carries them and ``passed`` reflects their absence.

    Energy-family margins are computed with the closed form for Gaussian
    mixtures; pass ``mc_seed`` to fall back to Monte Carlo for other
    density types (at Monte-Carlo noise, not ``tol``, resolution).
    """
    if pairs is None:
        pairs = [counterexample_pair()] + default_propriety_pairs(seed, n_pairs)

    def mean_score(p, q):
        if spec.family == "energy":
            if isinstance(p, GaussianMixture) and isinstance(q, GaussianMixture):
                return expected_energy_score_exact(p, q, spec.beta)
            if mc_seed is None:
                raise ValueError(
                    "energy propriety margins need Gaussian mixtures for the "
                    "closed form; pass mc_seed to accept Monte-Carlo noise")
            return expected_score(spec, p, q, seed=mc_seed, n=n).value
        return expected_score(spec, p, q, abs_tol=abs_tol,
                              rel_tol=rel_tol).value

    findings = []
    for truth, candidates in pairs:
        candidates = list(candidates)
        if not any(c is truth for c in candidates):
            candidates.insert(0, truth)
        self_mean = mean_score(truth, truth)
        for cand in candidates:
            if cand is truth:
                margin, dist = 0.0, 0.0
            else:
                margin = mean_score(cand, truth) - self_mean
                dist = l1_distance(cand, truth)
            reason = None
            if margin < -tol:
                reason = "margin below -tol: the rule preferred a wrong forecast"
            elif dist > strict_l1 and margin < strict_margin:
                reason = ("margin below the strict threshold for a candidate "
                          "far from the truth")
            findings.append(ProprietyFinding(
                truth=truth, candidate=cand, margin=margin, l1=dist,
                violation=reason is not None, reason=reason))
    return ProprietyReport(spec=spec, tol=tol, strict_l1=strict_l1,
                           strict_margin=strict_margin,
                           findings=tuple(findings))


# ---------------------------------------------------------------------------
# Implausibility witnesses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WitnessReport:
    """A concrete (p1, p2, y) with its density ratio and both scores.

    ``ratio`` is the measured pdf1(y)/pdf2(y) (``inf`` when p2 vanishes
    at y while p1 does not).  ``verified`` means ratio > 1 and s1 > s2:
    the forecast assigning more density to the outcome scored worse.
    """

    spec: ScoreSpec
    p1: object
    p2: object
    y: float
    ratio: float
    s1: ScoreValue
    s2: ScoreValue
    verified: bool

    def to_json(self) -> dict:
        return {
            "score": self.spec.to_json(),
            "p1": density_to_json(self.p1),
            "p2": density_to_json(self.p2),
            "y": self.y,
            "ratio": _encode_number(self.ratio),
            "s1": _score_value_json(self.s1),
            "s2": _score_value_json(self.s2),
            "verified": self.verified,
        }


def verify_witness(spec: ScoreSpec, p1, p2, y: float, *,
                   seed: Optional[int] = None,
                   n: int = 1_000_000) -> WitnessReport:
    """Measure the density ratio at ``y`` and both scores.

    Raises if both densities vanish at ``y`` (the ratio is undefined);
    reports ``ratio = inf`` when only the second one does.
    """
    y = float(y)
    d1 = float(p1.pdf(y))
    d2 = float(p2.pdf(y))
    if d1 == 0.0 and d2 == 0.0:
        raise ValueError("both densities vanish at the outcome; "
                         "the density ratio is undefined")
    ratio = math.inf if d2 == 0.0 else d1 / d2
    s1 = score(spec, p1, y, seed=seed, n=n)
    s2 = score(spec, p2, y, seed=seed, n=n)
    verified = ratio > 1.0 and s1.value > s2.value
    return WitnessReport(spec=spec, p1=p1, p2=p2, y=y, ratio=ratio,
                         s1=s1, s2=s2, verified=verified)


def _bisect_log_ratio(f: Callable[[float], float], lo: float, hi: float,
                      *, tol: float = _LOG_RATIO_TOL,
                      max_iter: int = 200) -> float:
    """Root of a monotone log-ratio equation f, to |f| <= tol."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise ValueError("log-ratio equation has no sign change on the bracket")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) <= tol:
            return mid
        if (fm > 0.0) == (flo > 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _power_density_bound(alpha: float, sigma1: float) -> float:
    """Largest p1(y) for which the power score of a width-sigma1 Gaussian
    stays positive: (alpha-1)^(1/(alpha-1)) alpha^(-3/(2(alpha-1)))
    / (sqrt(2 pi) sigma1)."""
    e = 1.0 / (alpha - 1.0)
    return ((alpha - 1.0) ** e * alpha ** (-1.5 * e)) / (_SQRT2PI * sigma1)


def construct_witness(spec: ScoreSpec, r: float, *,
                      seed: Optional[int] = None,
                      n: int = 1_000_000) -> WitnessReport:
    """Build a verified witness for the requested density ratio.

    Family recipes (p1 always denser at the outcome, yet scoring worse):

    - crps: the offset bimodal pair; y sits at p2's median where p2 has
      essentially no density, while p1 piles density right on y but has
      its median one unit away.  The measured ratio (about 2.6e21, or
      exactly inf for the piecewise-uniform variant used when
      ``r = inf``) dominates any requested finite r.
    - power(alpha): p1 = N(0, 1) evaluated where its density is half the
      positivity bound, p2 = N(y (1 - r), r^2), which makes
      p2(y) = p1(y) / r exactly and s2 = r^(1-alpha) s1 with s1 > 0.
    - pseudospherical(beta): equal means, sigma2 large enough that the
      wide forecast wins regardless of its density deficit at y; y then
      solves the ratio equation by bisection on the log ratio.
    - energy(beta): two narrow Gaussians at distances 1 (p2) and 2 (p1)
      from y; p1's width is solved by bisection so the tail ratio at y
      is exactly r, and its doubled distance costs roughly 2^beta
      against p2's 1.  Monte-Carlo scores, so a seed is required.

    Raises when the requested ratio is infeasible for the family recipe.
    """
    r = float(r)
    fam = spec.family
    if fam == "crps":
        if math.isinf(r):
            p2 = PiecewiseUniform((-1.5, -0.5, 0.5, 1.5), (0.5, 0.0, 0.5))
            p1 = PiecewiseUniform((-0.5, 0.5, 1.5, 2.5), (0.5, 0.0, 0.5))
        else:
            if not r > 1.0:
                raise ValueError("witness ratio must exceed 1")
            p2 = gaussian_mixture([(0.5, -1.0, 0.1), (0.5, 1.0, 0.1)])
            p1 = gaussian_mixture([(0.5, 0.0, 0.1), (0.5, 2.0, 0.1)])
            measured = float(p1.pdf(0.0)) / float(p2.pdf(0.0))
            if measured < r:
                raise ValueError(
                    f"requested ratio {r:g} exceeds the bimodal construction's "
                    f"density ratio {measured:.3g}")
        report = verify_witness(spec, p1, p2, 0.0)
    elif not math.isfinite(r) or not r > 1.0:
        raise ValueError("witness ratio must be a finite number above 1")
    elif fam == "power":
        alpha = spec.alpha
        sigma1 = 1.0
        p_target = 0.5 * _power_density_bound(alpha, sigma1)
        y = math.sqrt(-2.0 * math.log(p_target * _SQRT2PI * sigma1))
        p1 = gaussian(0.0, sigma1)
        p2 = gaussian(y * (1.0 - r), r * sigma1)
        report = verify_witness(spec, p1, p2, y)
    elif fam == "pseudospherical":
        beta = spec.beta
        sigma1 = 1.0
        # s1 > s2 at ratio r needs sigma2 > r^(beta/(beta-1)) sigma1; the
        # classic sigma2 > r^beta sigma1 condition is only sufficient for
        # beta >= 2, so take whichever exponent is larger plus headroom.
        exponent = max(beta, beta / (beta - 1.0))
        sigma2 = 1.25 * r ** exponent * sigma1
        p1 = gaussian(0.0, sigma1)
        p2 = gaussian(0.0, sigma2)
        log_r = math.log(r)
        slope = 0.5 * (1.0 / sigma1 ** 2 - 1.0 / sigma2 ** 2)
        def f(y):
            return math.log(sigma2 / sigma1) - slope * y * y - log_r
        hi = 1.0
        while f(hi) > 0.0:
            hi *= 2.0
        y = _bisect_log_ratio(f, 0.0, hi)
        report = verify_witness(spec, p1, p2, y)
    elif fam == "energy":
        if seed is None:
            raise ValueError("energy witnesses are scored by Monte Carlo "
                             "and require an explicit seed")
        y = 0.0
        p2 = gaussian(y - 1.0, 0.1)
        target = math.log(r * float(p2.pdf(y)))
        def g(s):
            return -math.log(s * _SQRT2PI) - 2.0 / (s * s) - target
        sigma1 = _bisect_log_ratio(g, 0.15, 1.9)
        p1 = gaussian(y - 2.0, sigma1)
        report = verify_witness(spec, p1, p2, y, seed=seed, n=n)
    else:
        raise ValueError(f"no witness construction for family {fam!r}")
    if not report.verified:
        raise RuntimeError(
            f"witness construction failed to verify for {spec.label()} "
            f"at ratio {r:g}")
    return report


# ---------------------------------------------------------------------------
# Transformation behaviour
# ---------------------------------------------------------------------------

def relative_score_curve(spec: ScoreSpec, system_a, system_b,
                         y_grid: Sequence[float], *,
                         seed: Optional[int] = None,
                         n: int = 1_000_000):
    """Pointwise score(A, y) - score(B, y) along a grid of outcomes."""
    out = []
    for y in y_grid:
        y = float(y)
        sa = score(spec, system_a, y, seed=seed, n=n)
        sb = score(spec, system_b, y, seed=seed, n=n)
        out.append((y, sa.value - sb.value))
    return out


def transformed_relative_score(spec: ScoreSpec, system_a, system_b,
                               y: float, transform: Transform, *,
                               seed: Optional[int] = None,
                               n: int = 1_000_000):
    """Relative score before and after a monotone change of variables.

    Returns ``(pre, post)`` where ``pre`` compares the systems at ``y``
    and ``post`` compares their pushforwards at ``transform(y)``.
    """
    y = float(y)
    pre = (score(spec, system_a, y, seed=seed, n=n).value
           - score(spec, system_b, y, seed=seed, n=n).value)
    ta = pushforward(system_a, transform)
    tb = pushforward(system_b, transform)
    ystar = float(np.asarray(transform.forward(y), dtype=float))
    post = (score(spec, ta, ystar, seed=seed, n=n).value
            - score(spec, tb, ystar, seed=seed, n=n).value)
    return pre, post


@dataclass(frozen=True)
class FlipReport:
    """A change of variables reversing a score's preference at ``y``.

    ``relative_pre * relative_post < 0`` by construction: the rule
    prefers one system on the original scale and the other after the
    transform.  ``window`` brackets the outcome interval on the original
    scale where the disagreement holds (its endpoints are the two zero
    crossings, located to the search tolerance).
    """

    spec: ScoreSpec
    system_a: object
    system_b: object
    transform: Transform
    y: float
    relative_pre: float
    relative_post: float
    window: tuple

    def to_json(self) -> dict:
        return {
            "score": self.spec.to_json(),
            "system_a": density_to_json(self.system_a),
            "system_b": density_to_json(self.system_b),
            "transform": self.transform.to_json(),
            "y": self.y,
            "relative_pre": _encode_number(self.relative_pre),
            "relative_post": _encode_number(self.relative_post),
            "window": [self.window[0], self.window[1]],
        }


def sign_change_root(f: Callable[[float], float], lo: float, hi: float, *,
                     tol: float = 1e-6, max_iter: int = 200) -> float:
    """Bisect a scalar function's sign change on [lo, hi] to width tol."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise ValueError("function does not change sign on the bracket")
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0.0) == (flo > 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_preference_flip(spec: ScoreSpec, system_a, system_b,
                         transform: Transform, y_range, *,
                         grid_points: int = 2001, tol: float = 1e-6,
                         seed: Optional[int] = None,
                         n: int = 1_000_000) -> Optional[FlipReport]:
    """Search ``y_range`` for an outcome where the transform flips the
    preference between the systems.

    Scans a ``grid_points`` grid of pre/post relative scores (skipping
    outcomes where either is non-finite), then bisects the boundaries of
    the first interval with pre * post < 0 down to ``tol``.  Returns
    None when no flip exists in the range, which for an invariant rule
    such as ignorance is the expected result.
    """
    lo, hi = (float(y_range[0]), float(y_range[1]))
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError("y range must be a finite increasing interval")
    ta = pushforward(system_a, transform)
    tb = pushforward(system_b, transform)

    def pre(y):
        return (score(spec, system_a, y, seed=seed, n=n).value
                - score(spec, system_b, y, seed=seed, n=n).value)

    def post(y):
        ystar = float(np.asarray(transform.forward(y), dtype=float))
        return (score(spec, ta, ystar, seed=seed, n=n).value
                - score(spec, tb, ystar, seed=seed, n=n).value)

    def product(y):
        return pre(y) * post(y)

    ys = np.linspace(lo, hi, grid_points)
    values = np.array([product(y) for y in ys])
    finite = np.isfinite(values)
    flipped = finite & (values < 0.0)
    if not np.any(flipped):
        return None
    i = int(np.argmax(flipped))

    # Walk outward to the nearest finite grid points where the product
    # is non-negative, then bisect each boundary.
    left = i
    while left > 0 and finite[left - 1] and values[left - 1] < 0.0:
        left -= 1
    right = i
    while right + 1 < grid_points and finite[right + 1] and values[right + 1] < 0.0:
        right += 1
    if left > 0 and finite[left - 1]:
        window_lo = sign_change_root(product, float(ys[left - 1]),
                                     float(ys[left]), tol=tol)
    else:
        window_lo = float(ys[left])
    if right + 1 < grid_points and finite[right + 1]:
        window_hi = sign_change_root(product, float(ys[right]),
                                     float(ys[right + 1]), tol=tol)
    else:
        window_hi = float(ys[right])

    y_flip = 0.5 * (window_lo + window_hi)
    rel_pre, rel_post = pre(y_flip), post(y_flip)
    if not (rel_pre * rel_post < 0.0):
        # The window midpoint can sit on a numerical boundary; fall back
        # to the grid point where the flip was strict.
        y_flip = float(ys[i])
        rel_pre, rel_post = pre(y_flip), post(y_flip)
    return FlipReport(spec=spec, system_a=system_a, system_b=system_b,
                      transform=transform, y=y_flip,
                      relative_pre=rel_pre, relative_post=rel_post,
                      window=(window_lo, window_hi))


# ---------------------------------------------------------------------------
# The CRPS argmin-over-outcomes operation
# ---------------------------------------------------------------------------

def crps_argmin_outcome(d, search_range) -> float:
    """Outcome minimising the CRPS of a fixed forecast density.

    The CRPS derivative in the outcome is 2 cdf(y) - 1, so the minimiser
    is the median, however small the density there.  The minimum's bowl
    can be flatter than any quadrature tolerance (depth scales with the
    density near the median), so this bisects the derivative's sign
    change rather than comparing score values; both edges of any
    zero-density gap are located and their midpoint returned, matching
    the ``quantile`` convention.

    ``search_range`` must bracket the median: cdf below one half on the
    left end and above it on the right.
    """
    lo, hi = (float(search_range[0]), float(search_range[1]))
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError("search range must be a finite increasing interval")

    if hasattr(d, "cdf_minus"):
        def g(t):
            return d.cdf_minus(t, 0.5)
    else:
        def g(t):
            return float(d.cdf(t)) - 0.5

    if not (g(lo) < 0.0 < g(hi)):
        raise ValueError("search range must bracket the median")

    def edge(a, b, below: bool) -> float:
        for _ in range(200):
            if b - a <= 1e-12:
                break
            m = 0.5 * (a + b)
            if m <= a or m >= b:
                break
            t = g(m)
            if (t < 0.0) if below else (t <= 0.0):
                a = m
            else:
                b = m
        return 0.5 * (a + b)

    return 0.5 * (edge(lo, hi, True) + edge(lo, hi, False))


# ---------------------------------------------------------------------------
# Canonical demonstration pairs
# ---------------------------------------------------------------------------

def median_pathology_pair():
    """Offset bimodal mixtures: at y = 0, system B piles density on the
    outcome yet its CRPS is worse than system A's, whose density there
    is ~8e-22 but whose median is exactly 0."""
    a = gaussian_mixture([(0.5, -1.0, 0.1), (0.5, 1.0, 0.1)])
    b = gaussian_mixture([(0.5, 0.0, 0.1), (0.5, 2.0, 0.1)])
    return a, b


def power_pathology_pair():
    """Narrow N(-3, 0.5^2) versus wide N(3, 1): left of -4 the narrow
    system carries all the density yet the quadratic score prefers the
    wide one."""
    return gaussian(-3.0, 0.5), gaussian(3.0, 1.0)


def spherical_pathology_pair():
    """N(0, 1) versus N(0, 5^2): for outcomes around |y| = 1.5 the
    narrow system assigns ~1.7x the density but the spherical score
    prefers the wide one."""
    return gaussian(0.0, 1.0), gaussian(0.0, 5.0)


def transform_flip_pair():
    """Interleaved bimodal mixtures whose CRPS preference reverses under
    the cubic transform for outcomes just above 11.5."""
    a = gaussian_mixture([(0.5, 10.0, 0.1), (0.5, 12.0, 0.1)])
    b = gaussian_mixture([(0.5, 11.0, 0.1), (0.5, 13.0, 0.1)])
    return a, b
