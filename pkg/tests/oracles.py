"""Independent reference implementations used to freeze expected values.

Everything here is deliberately built from different primitives than the
package under test: the Gaussian CDF comes from math.erfc rather than
scipy.special.ndtr, integrals go through scipy.integrate.quad rather
than the package's own quadrature, and the CRPS formulas are the
closed-form absolute-moment identities rather than CDF integrals.
"""

from __future__ import annotations

import math

from scipy.integrate import quad

SQRT2 = math.sqrt(2.0)
SQRT_PI = math.sqrt(math.pi)
INV_LN2 = 1.0 / math.log(2.0)


def phi(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def Phi(x: float) -> float:
    return 0.5 * math.erfc(-x / SQRT2)


def gaussian_quantile(p: float, mu: float = 0.0, sigma: float = 1.0) -> float:
    if not 0.0 < p < 1.0:
        raise ValueError("p must be inside (0, 1)")
    lo, hi = -40.0, 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if Phi(mid) < p:
            lo = mid
        else:
            hi = mid
    return mu + sigma * 0.5 * (lo + hi)


def mixture_pdf(components, x: float) -> float:
    return math.fsum(w * phi((x - m) / s) / s for w, m, s in components)


def mixture_cdf(components, x: float) -> float:
    return math.fsum(w * Phi((x - m) / s) for w, m, s in components)


def folded_mean(m: float, v: float) -> float:
    """E|X| for X ~ N(m, v): the folded normal mean."""
    s = math.sqrt(v)
    return (s * math.sqrt(2.0 / math.pi) * math.exp(-m * m / (2.0 * v))
            + m * (1.0 - 2.0 * Phi(-m / s)))


def crps_gaussian_closed(mu: float, sigma: float, y: float) -> float:
    z = (y - mu) / sigma
    return sigma * (z * (2.0 * Phi(z) - 1.0) + 2.0 * phi(z)
                    - 1.0 / SQRT_PI)


def crps_mixture_closed(components, y: float) -> float:
    """CRPS via E|X - y| - 0.5 E|X - X'| with X, X' iid from the mixture.

    Differences of independent Gaussian components are Gaussian, so both
    expectations reduce to folded-normal means.
    """
    first = math.fsum(w * folded_mean(m - y, s * s)
                      for w, m, s in components)
    second = math.fsum(
        wi * wj * folded_mean(mi - mj, si * si + sj * sj)
        for wi, mi, si in components
        for wj, mj, sj in components)
    return first - 0.5 * second


def expected_crps_gaussians(mu_f: float, s_f: float,
                            mu_t: float, s_t: float) -> float:
    """E_truth[CRPS(forecast, Y)] for two Gaussians, in closed form."""
    return (folded_mean(mu_f - mu_t, s_f * s_f + s_t * s_t)
            - 0.5 * folded_mean(0.0, 2.0 * s_f * s_f))


def cross_entropy_bits(mu_f: float, s_f: float,
                       mu_t: float, s_t: float) -> float:
    """E_truth[-log2 forecast(Y)] for two Gaussians."""
    nats = (math.log(s_f * math.sqrt(2.0 * math.pi))
            + (s_t * s_t + (mu_t - mu_f) ** 2) / (2.0 * s_f * s_f))
    return nats * INV_LN2


def entropy_bits(sigma: float) -> float:
    return cross_entropy_bits(0.0, sigma, 0.0, sigma)


def gauss_inner(mu1: float, s1: float, mu2: float, s2: float) -> float:
    """Integral of the product of two Gaussian densities."""
    v = s1 * s1 + s2 * s2
    return phi((mu1 - mu2) / math.sqrt(v)) / math.sqrt(v)


def gauss_l_alpha(sigma: float, alpha: float) -> float:
    """Integral of N(mu, sigma^2)^alpha over the real line."""
    return ((2.0 * math.pi) ** ((1.0 - alpha) / 2.0)
            / math.sqrt(alpha) * sigma ** (1.0 - alpha))


def quad_integral(f, lo: float, hi: float, **kw) -> float:
    kw.setdefault("epsabs", 1e-12)
    kw.setdefault("epsrel", 1e-12)
    kw.setdefault("limit", 400)
    value, _ = quad(f, lo, hi, **kw)
    return value


def abs_moment_quad(m: float, v: float, beta: float) -> float:
    """E|X|^beta for X ~ N(m, v), by direct integration."""
    s = math.sqrt(v)
    return quad_integral(
        lambda x: abs(x) ** beta * phi((x - m) / s) / s,
        m - 14.0 * s, m + 14.0 * s)


def crps_quad(pdf, cdf, y: float, lo: float, hi: float) -> float:
    """CRPS via scipy.integrate.quad on the squared CDF distance."""
    left = quad_integral(lambda x: cdf(x) ** 2, lo, y)
    right = quad_integral(lambda x: (1.0 - cdf(x)) ** 2, y, hi)
    return left + right


def expected_score_quad(pointwise, truth_pdf, lo: float, hi: float,
                        **kw) -> float:
    """E_truth[S(p, Y)] by integrating a pointwise score against a pdf."""
    return quad_integral(lambda y: pointwise(y) * truth_pdf(y), lo, hi,
                         **kw)
