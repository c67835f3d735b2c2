"""Prior families: densities, CDFs, quartile matching and sampling.

Parameterizations:

* ``Normal(M, s)``: ``s`` is the standard deviation.
* ``DoubleExponential(M, nu)``: density ``exp(-sqrt(2)|t-M|/nu) / (nu*sqrt(2))``,
  so ``nu`` is the standard deviation and ``nu/sqrt(2)`` the Laplace scale.
* ``Cauchy(M, g)``: half-width ``g``.
* ``ScaledBeta2(p, q, b)`` on ``t > 0``:
  ``Gamma(p+q)/(Gamma(p)Gamma(q)) / b * (t/b)^(p-1) / (1+t/b)^(p+q)``.
* ``CauchyScaledBeta2(M, b)``: marginal of ``Cauchy(M, s)`` with
  ``s ~ ScaledBeta2(1, 1, b)``.  Has a log pole at ``M``.
* ``CauchyScale2Beta2(M, b)``: marginal of ``Cauchy(M, s)`` with
  ``s**2 ~ ScaledBeta2(1, 1, b)``.  Finite everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import special

from .quadrature import integrate

Family = Literal["Normal", "DoubleExponential", "Cauchy", "ScaledBeta2",
                 "CauchyScaledBeta2", "CauchyScale2Beta2"]
FAMILIES = ("Normal", "DoubleExponential", "Cauchy", "ScaledBeta2",
            "CauchyScaledBeta2", "CauchyScale2Beta2")

SQRT2 = math.sqrt(2.0)
LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class DomainError(ValueError):
    pass


# --- standard normal ---------------------------------------------------------

_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)


def normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / SQRT2)


def normal_ppf(p: float) -> float:
    """Standard normal quantile.

    Acklam's rational approximation (relative error ~1e-9), polished with
    one Halley step against ``erfc`` which brings it to ~1e-15.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"probability {p} outside (0, 1)")
    plow = 0.02425
    if p < plow:
        q = math.sqrt(-2 * math.log(p))
        x = ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
             / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1))
    elif p <= 1 - plow:
        q = p - 0.5
        r = q * q
        x = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
             / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1))
    else:
        q = math.sqrt(-2 * math.log1p(-p))
        x = -((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
              / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1))
    e = normal_cdf(x) - p
    u = e * math.sqrt(2 * math.pi) * math.exp(x * x / 2)
    return x - u / (1 + x * u / 2)


Q75 = normal_ppf(0.75)


# --- prior specification -----------------------------------------------------

@dataclass(frozen=True)
class PriorSpec:
    """One prior family with its location, scale and (ScaledBeta2) shapes.

    ``scale`` is the family's own scale: sd for Normal, ``nu`` for
    DoubleExponential, half-width for Cauchy, ``b`` for the Beta2-based
    families.  ``location`` is ignored by ScaledBeta2.
    """

    family: Family
    location: float = 0.0
    scale: float = 1.0
    shape_p: float = 1.0
    shape_q: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise DomainError(f"scale must be positive, got {self.scale}")
        if not (self.shape_p > 0 and self.shape_q > 0):
            raise DomainError("shape parameters must be positive")
        if not math.isfinite(self.location):
            raise DomainError("location must be finite")

    @property
    def poles(self) -> tuple[float, ...]:
        return (self.location,) if self.family == "CauchyScaledBeta2" else ()


def normal(location, sd):
    return PriorSpec("Normal", location, sd)


def double_exponential(location, nu):
    return PriorSpec("DoubleExponential", location, nu)


def cauchy(location, gamma):
    return PriorSpec("Cauchy", location, gamma)


def scaled_beta2(p, q, b):
    return PriorSpec("ScaledBeta2", 0.0, b, p, q)


# --- the two closed-form marginals ---------------------------------------------

def cauchy_scbeta2_density(theta, b: float, location: float = 0.0):
    """Cauchy / ScaledBeta2(1, 1, b) marginal density.

    Closed form::

        b/(pi (b^2+t^2)^2) * [-(b^2+t^2-pi b|t|) + (b-t)(b+t)(log b - log|t|)]

    evaluated through ``u = |t|/b`` with a rescaled branch for ``u > 1`` so
    that neither ``t**2`` overflow nor the ``u**2 log u`` vs ``u**2``
    difference loses precision.  Returns ``inf`` at the pole ``t == 0``.
    """
    if not b > 0:
        raise DomainError(f"b must be positive, got {b}")
    t = np.asarray(theta, dtype=float) - location
    if not np.all(np.isfinite(t)):
        raise DomainError("theta must be finite")
    u = np.abs(t) / b
    out = np.empty_like(u)
    small = u <= 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        us = u[small]
        lu = np.log(us)
        g = -(1.0 + us * us - math.pi * us) - (1.0 - us * us) * lu
        out[small] = g / (1.0 + us * us) ** 2
        ul = u[~small]
        v = 1.0 / ul
        lu = np.log(ul)
        v2 = v * v
        out[~small] = (v2 * (lu - 1.0) + math.pi * v2 * v - v2 * v2 * (lu + 1.0)) / (1.0 + v2) ** 2
    out = np.where(u == 0.0, np.inf, out) / (math.pi * b)
    return float(out) if np.ndim(out) == 0 else out


def cauchy_scbeta2_mixture_integrand(theta: float, b: float):
    """Integrand of the scale mixture over ``s > 0`` (for cross-checks)."""
    return lambda s: b * s / (math.pi * (b + s) ** 2 * (theta * theta + s * s))


def cauchy_s2beta2_density(theta, mu: float = 0.0, b: float = 4.0):
    """Cauchy / ScaledBeta2(1, 1, b)-on-squared-scale marginal:
    ``1 / (2 sqrt(b) (1 + |t - mu|/sqrt(b))^2)``."""
    if not b > 0:
        raise DomainError(f"b must be positive, got {b}")
    t = np.asarray(theta, dtype=float)
    rb = math.sqrt(b)
    out = 1.0 / (2.0 * rb * (1.0 + np.abs(t - mu) / rb) ** 2)
    return float(out) if np.ndim(out) == 0 else out


# --- density / log density / cdf -----------------------------------------------

def logdensity(spec: PriorSpec, t):
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise DomainError("non-finite argument")
    fam, m, s = spec.family, spec.location, spec.scale
    if fam == "Normal":
        z = (t - m) / s
        out = -0.5 * z * z - math.log(s) - LOG_SQRT_2PI
    elif fam == "DoubleExponential":
        out = -SQRT2 * np.abs(t - m) / s - math.log(s * SQRT2)
    elif fam == "Cauchy":
        z = (t - m) / s
        out = -np.log1p(z * z) - math.log(math.pi * s)
    elif fam == "ScaledBeta2":
        if np.any(t <= 0):
            raise DomainError("ScaledBeta2 support is t > 0")
        p, q = spec.shape_p, spec.shape_q
        y = t / s
        out = (-special.betaln(p, q) - math.log(s) + (p - 1) * np.log(y)
               - (p + q) * np.log1p(y))
    elif fam == "CauchyScaledBeta2":
        with np.errstate(divide="ignore"):
            out = np.log(cauchy_scbeta2_density(t, s, m))
    else:
        rb = math.sqrt(s)
        out = -math.log(2 * rb) - 2 * np.log1p(np.abs(t - m) / rb)
    return float(out) if np.ndim(out) == 0 else out


def density(spec: PriorSpec, t):
    if spec.family == "CauchyScaledBeta2":
        t = np.asarray(t, dtype=float)
        if not np.all(np.isfinite(t)):
            raise DomainError("non-finite argument")
        return cauchy_scbeta2_density(t, spec.scale, spec.location)
    out = np.exp(logdensity(spec, t))
    return float(out) if np.ndim(out) == 0 else out


def cdf(spec: PriorSpec, t: float) -> float:
    fam, m, s = spec.family, spec.location, spec.scale
    if fam == "Normal":
        return normal_cdf((t - m) / s)
    if fam == "DoubleExponential":
        z = SQRT2 * (t - m) / s
        return 0.5 * math.exp(z) if z < 0 else 1 - 0.5 * math.exp(-z)
    if fam == "Cauchy":
        return 0.5 + math.atan((t - m) / s) / math.pi
    if fam == "ScaledBeta2":
        if t <= 0:
            return 0.0
        y = t / s
        return float(special.betainc(spec.shape_p, spec.shape_q, y / (1 + y)))
    if fam == "CauchyScale2Beta2":
        d = abs(t - m) / math.sqrt(s)
        tail = 0.5 / (1 + d)
        return 1 - tail if t >= m else tail
    # CauchyScaledBeta2: symmetric; integrate the density from the pole out
    d = abs(t - m)
    if d == 0:
        return 0.5
    mass = integrate(lambda x: cauchy_scbeta2_density(x, s), 0.0, d, epsrel=1e-12).value
    return 0.5 + mass if t > m else 0.5 - mass


def support(spec: PriorSpec) -> tuple[float, float]:
    return (0.0, math.inf) if spec.family == "ScaledBeta2" else (-math.inf, math.inf)


def total_mass(spec: PriorSpec, epsrel: float = 1e-10) -> float:
    """Numerical integral of the density over its support (pole-aware)."""
    lo, hi = support(spec)
    pts = (spec.location,) if lo == -math.inf else ()
    scale = spec.scale if spec.family != "CauchyScale2Beta2" else math.sqrt(spec.scale)
    return integrate(lambda x: density(spec, x), lo, hi, points=pts, epsrel=epsrel,
                     tail_scale=scale).value


# --- quartile matching ---------------------------------------------------------

def match_quartiles(sigma0: float, family: str) -> float:
    """Scale of a DoubleExponential or Cauchy prior whose quartiles coincide
    with those of ``Normal(M, sigma0**2)``."""
    if not sigma0 > 0:
        raise DomainError(f"sigma0 must be positive, got {sigma0}")
    if family == "DoubleExponential":
        return SQRT2 * sigma0 * Q75 / math.log(2.0)
    if family == "Cauchy":
        return sigma0 * Q75
    raise DomainError(f"quartile matching defined for DoubleExponential/Cauchy, not {family!r}")


# --- sampling ------------------------------------------------------------------

def sample(spec: PriorSpec, rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw ``n`` i.i.d. values; deterministic for a given generator state."""
    if n < 1:
        raise DomainError("n must be >= 1")
    fam, m, s = spec.family, spec.location, spec.scale
    if fam == "Normal":
        return m + s * rng.standard_normal(n)
    if fam == "DoubleExponential":
        return rng.laplace(m, s / SQRT2, n)
    if fam == "Cauchy":
        return m + s * rng.standard_cauchy(n)
    if fam == "ScaledBeta2":
        return s * rng.standard_gamma(spec.shape_p, n) / rng.standard_gamma(spec.shape_q, n)
    # two-stage mixtures; ScaledBeta2(1, 1, b) via inverse cdf b*u/(1-u)
    u = rng.random(n)
    mix = s * u / (1.0 - u)
    width = mix if fam == "CauchyScaledBeta2" else np.sqrt(mix)
    return m + width * rng.standard_cauchy(n)
