"""Axial material profiles eps(z), mu(z) and their certified bounds.

Every profile in scope is built from four closed-form families

    constant          c
    gaussian_bump     base + A exp(-((z - c)/w)^2)
    sech2_bump        base + A sech((z - c)/w)^2
    cosine_periodic   mean + A cos(2 pi z / a)

and finite sums of compatible families.  All of them are smooth,
bounded, and bounded away from zero once validated, with first and
second derivatives available in closed form.  Derivatives are never
approximated by differences here: the coordinate transform downstream
consumes exact derivative values.

A coefficient pair is classified either as stabilizing (eps and mu
approach limits eps*, mu* with integrable decay; bump families) or as
periodic with a shared period a (cosine families).  The classification
decides which spectral analysis applies, so it is validated at
construction, not inferred later.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = [
    "Constant",
    "GaussianBump",
    "Sech2Bump",
    "CosinePeriodic",
    "ProfileSum",
    "ProfileFamily",
    "Stabilizing",
    "Periodic",
    "CoefficientProfile",
    "make_profile",
    "EssentialBounds",
    "essential_bounds",
    "ProductComparison",
    "locate_product_excess",
    "family_from_dict",
    "family_to_dict",
]

DEFAULT_POSITIVITY_FLOOR = 1e-9

# sup_u |d/du exp(-u^2)| and |d/du sech^2 u|, used for Lipschitz padding
_GAUSS_DSUP = math.sqrt(2.0) * math.exp(-0.5)
_SECH2_DSUP = 4.0 / (3.0 * math.sqrt(3.0))


def _ret(z, values):
    if np.isscalar(z) or getattr(z, "ndim", 1) == 0:
        return float(values)
    return values


@dataclass(frozen=True)
class Constant:
    value: float

    def eval(self, z, order: int = 0):
        if order not in (0, 1, 2):
            raise ValidationError(f"derivative order {order} not available")
        u = np.asarray(z, dtype=float)
        out = np.full_like(u, self.value) if order == 0 else np.zeros_like(u)
        return _ret(z, out)

    def terms(self):
        return [self]

    def limit(self):
        return self.value

    def natural_period(self):
        return None  # compatible with any period

    def bounds_exact(self):
        return (self.value, self.value)

    def derivative_sup(self):
        return 0.0

    def bump_window(self):
        return None


@dataclass(frozen=True)
class GaussianBump:
    base: float
    amplitude: float
    center: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ValidationError("bump width must be positive")

    def eval(self, z, order: int = 0):
        u = (np.asarray(z, dtype=float) - self.center) / self.width
        g = np.exp(-u * u)
        if order == 0:
            out = self.base + self.amplitude * g
        elif order == 1:
            out = self.amplitude * (-2.0 * u) * g / self.width
        elif order == 2:
            out = self.amplitude * (4.0 * u * u - 2.0) * g / self.width**2
        else:
            raise ValidationError(f"derivative order {order} not available")
        return _ret(z, out)

    def terms(self):
        return [self]

    def limit(self):
        return self.base

    def natural_period(self):
        return 0.0  # marker: not periodic

    def bounds_exact(self):
        return (self.base + min(0.0, self.amplitude), self.base + max(0.0, self.amplitude))

    def derivative_sup(self):
        return abs(self.amplitude) * _GAUSS_DSUP / self.width

    def bump_window(self):
        return (self.center - 12.0 * self.width, self.center + 12.0 * self.width)


@dataclass(frozen=True)
class Sech2Bump:
    base: float
    amplitude: float
    center: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ValidationError("bump width must be positive")

    def eval(self, z, order: int = 0):
        u = (np.asarray(z, dtype=float) - self.center) / self.width
        s = 1.0 / np.cosh(u)
        s2 = s * s
        t = np.tanh(u)
        if order == 0:
            out = self.base + self.amplitude * s2
        elif order == 1:
            out = self.amplitude * (-2.0 * s2 * t) / self.width
        elif order == 2:
            out = self.amplitude * (4.0 * s2 * t * t - 2.0 * s2 * s2) / self.width**2
        else:
            raise ValidationError(f"derivative order {order} not available")
        return _ret(z, out)

    def terms(self):
        return [self]

    def limit(self):
        return self.base

    def natural_period(self):
        return 0.0

    def bounds_exact(self):
        return (self.base + min(0.0, self.amplitude), self.base + max(0.0, self.amplitude))

    def derivative_sup(self):
        return abs(self.amplitude) * _SECH2_DSUP / self.width

    def bump_window(self):
        return (self.center - 16.0 * self.width, self.center + 16.0 * self.width)


@dataclass(frozen=True)
class CosinePeriodic:
    mean: float
    amplitude: float
    period: float

    def __post_init__(self):
        if not self.period > 0:
            raise ValidationError("period must be positive")

    def eval(self, z, order: int = 0):
        k = 2.0 * np.pi / self.period
        ph = k * np.asarray(z, dtype=float)
        if order == 0:
            out = self.mean + self.amplitude * np.cos(ph)
        elif order == 1:
            out = -self.amplitude * k * np.sin(ph)
        elif order == 2:
            out = -self.amplitude * k * k * np.cos(ph)
        else:
            raise ValidationError(f"derivative order {order} not available")
        return _ret(z, out)

    def terms(self):
        return [self]

    def limit(self):
        return None

    def natural_period(self):
        return self.period

    def bounds_exact(self):
        return (self.mean - abs(self.amplitude), self.mean + abs(self.amplitude))

    def derivative_sup(self):
        return abs(self.amplitude) * 2.0 * np.pi / self.period

    def bump_window(self):
        return None


@dataclass(frozen=True)
class ProfileSum:
    terms_: tuple

    def __init__(self, terms):
        flat = []
        for t in terms:
            flat.extend(t.terms())
        if not flat:
            raise ValidationError("empty profile sum")
        object.__setattr__(self, "terms_", tuple(flat))

    def eval(self, z, order: int = 0):
        u = np.asarray(z, dtype=float)
        out = np.zeros_like(u)
        for t in self.terms_:
            out = out + np.asarray(t.eval(u, order))
        return _ret(z, out)

    def terms(self):
        return list(self.terms_)

    def limit(self):
        parts = [t.limit() for t in self.terms_]
        if any(p is None for p in parts):
            return None
        return float(sum(parts))

    def natural_period(self):
        periods = [t.natural_period() for t in self.terms_]
        if any(p == 0.0 for p in periods):
            return 0.0
        concrete = [p for p in periods if p is not None]
        return max(concrete) if concrete else None

    def bounds_exact(self):
        return None  # sums certified by sampling at the profile level

    def derivative_sup(self):
        return float(sum(t.derivative_sup() for t in self.terms_))

    def bump_window(self):
        wins = [t.bump_window() for t in self.terms_ if t.bump_window() is not None]
        if not wins:
            return None
        return (min(w[0] for w in wins), max(w[1] for w in wins))


ProfileFamily = Constant | GaussianBump | Sech2Bump | CosinePeriodic | ProfileSum


@dataclass(frozen=True)
class Stabilizing:
    eps_limit: float
    mu_limit: float


@dataclass(frozen=True)
class Periodic:
    period: float


def _sampling_window(fam: ProfileFamily, classification) -> tuple[float, float]:
    if isinstance(classification, Periodic):
        return (0.0, classification.period)
    win = fam.bump_window()
    return win if win is not None else (-1.0, 1.0)


def _candidate_points(fam: ProfileFamily, lo: float, hi: float) -> list[float]:
    pts = [lo, hi]
    for t in fam.terms():
        c = getattr(t, "center", None)
        if c is not None and lo <= c <= hi:
            pts.append(float(c))
    return pts


def _certified_bounds(fam: ProfileFamily, classification, n: int = 20001) -> tuple[float, float]:
    """Closed form for leaves; dense sampling with Lipschitz padding for sums.

    The padded interval always contains the true range over the window,
    and the limit value is folded in for stabilizing families so tails
    beyond the window cannot escape the bracket.
    """
    exact = fam.bounds_exact()
    if exact is not None:
        return exact
    lo, hi = _sampling_window(fam, classification)
    zs = np.linspace(lo, hi, n)
    vals = fam.eval(zs, 0)
    pad = 0.5 * (zs[1] - zs[0]) * fam.derivative_sup()
    vmin = float(np.min(vals)) - pad
    vmax = float(np.max(vals)) + pad
    for p in _candidate_points(fam, lo, hi):
        v = fam.eval(p, 0)
        vmin = min(vmin, v)
        vmax = max(vmax, v)
    lim = fam.limit()
    if lim is not None and isinstance(classification, Stabilizing):
        vmin = min(vmin, lim)
        vmax = max(vmax, lim)
    return (vmin, vmax)


@dataclass(frozen=True)
class EssentialBounds:
    eps_lower: float
    eps_upper: float
    mu_lower: float
    mu_upper: float
    product_sup: float


@dataclass(frozen=True)
class CoefficientProfile:
    epsilon: ProfileFamily
    mu: ProfileFamily
    classification: Stabilizing | Periodic

    @property
    def period(self) -> float:
        if not isinstance(self.classification, Periodic):
            raise ValidationError("profile is not periodic")
        return self.classification.period

    @property
    def eps_limit(self) -> float:
        if not isinstance(self.classification, Stabilizing):
            raise ValidationError("profile is not stabilizing")
        return self.classification.eps_limit

    @property
    def mu_limit(self) -> float:
        if not isinstance(self.classification, Stabilizing):
            raise ValidationError("profile is not stabilizing")
        return self.classification.mu_limit

    @property
    def limit_product(self) -> float:
        return self.eps_limit * self.mu_limit

    def swapped(self) -> "CoefficientProfile":
        """Same material with the roles of eps and mu exchanged."""
        cls = self.classification
        if isinstance(cls, Stabilizing):
            cls = Stabilizing(cls.mu_limit, cls.eps_limit)
        return CoefficientProfile(self.mu, self.epsilon, cls)


def _is_stabilizing_capable(fam: ProfileFamily) -> bool:
    return all(isinstance(t, (Constant, GaussianBump, Sech2Bump)) for t in fam.terms())


def _validate_periodic_family(fam: ProfileFamily, a: float, label: str):
    for t in fam.terms():
        if isinstance(t, Constant):
            continue
        if not isinstance(t, CosinePeriodic):
            raise ValidationError(f"{label}: family {type(t).__name__} is not periodic")
        ratio = a / t.period
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ValidationError(
                f"{label}: component period {t.period} does not divide the profile period {a}"
            )
    # the contract is exact periodicity, so check it numerically too
    zs = np.linspace(0.0, a, 1000)
    v0 = np.asarray(fam.eval(zs, 0))
    v1 = np.asarray(fam.eval(zs + a, 0))
    scale = max(1.0, float(np.max(np.abs(v0))))
    if np.max(np.abs(v1 - v0)) > 1e-12 * scale:
        raise ValidationError(f"{label}: profile fails the shared-period check")


def _derive_classification(eps: ProfileFamily, mu: ProfileFamily):
    p_eps, p_mu = eps.natural_period(), mu.natural_period()
    has_cosine = (p_eps not in (None, 0.0)) or (p_mu not in (None, 0.0))
    if has_cosine:
        candidates = [p for p in (p_eps, p_mu) if p not in (None, 0.0)]
        return Periodic(max(candidates))
    if _is_stabilizing_capable(eps) and _is_stabilizing_capable(mu):
        return Stabilizing(eps.limit(), mu.limit())
    raise ValidationError("cannot classify profile; pass an explicit classification")


def make_profile(
    epsilon: ProfileFamily,
    mu: ProfileFamily,
    classification: Stabilizing | Periodic | None = None,
    positivity_floor: float = DEFAULT_POSITIVITY_FLOOR,
) -> CoefficientProfile:
    """Validate and classify a coefficient pair.

    Raises ValidationError when a family does not fit the declared
    classification, when limits disagree with the family tails, or when
    either coefficient is not certified to stay above the floor.
    """
    if classification is None:
        classification = _derive_classification(epsilon, mu)

    if isinstance(classification, Stabilizing):
        for fam, label in ((epsilon, "epsilon"), (mu, "mu")):
            if not _is_stabilizing_capable(fam):
                raise ValidationError(f"{label}: family is not stabilizing (has a periodic part)")
        for lim, fam, label in (
            (classification.eps_limit, epsilon, "epsilon"),
            (classification.mu_limit, mu, "mu"),
        ):
            derived = fam.limit()
            if abs(lim - derived) > 1e-12 * max(1.0, abs(derived)):
                raise ValidationError(
                    f"{label}: declared limit {lim} does not match the family tail {derived}"
                )
            if lim <= 0:
                raise ValidationError(f"{label}: limit must be positive")
    elif isinstance(classification, Periodic):
        if not classification.period > 0:
            raise ValidationError("period must be positive")
        _validate_periodic_family(epsilon, classification.period, "epsilon")
        _validate_periodic_family(mu, classification.period, "mu")
    else:
        raise ValidationError(f"unknown classification {classification!r}")

    for fam, label in ((epsilon, "epsilon"), (mu, "mu")):
        low, _ = _certified_bounds(fam, classification)
        if low < positivity_floor:
            raise ValidationError(
                f"{label}: certified lower bound {low:.3g} is below the floor {positivity_floor:.3g}"
            )
    return CoefficientProfile(epsilon, mu, classification)


def essential_bounds(profile: CoefficientProfile) -> EssentialBounds:
    """(eps_0, eps_1, mu_0, mu_1, sup eps*mu), each bracket certified.

    Leaves get exact closed-form ranges.  When one coefficient is
    constant the product bound is exact as well; otherwise the product
    is sampled densely with Lipschitz padding, which can only widen the
    bracket, never miss a value.
    """
    e_lo, e_hi = _certified_bounds(profile.epsilon, profile.classification)
    m_lo, m_hi = _certified_bounds(profile.mu, profile.classification)

    if isinstance(profile.epsilon, Constant):
        prod_sup = profile.epsilon.value * m_hi
    elif isinstance(profile.mu, Constant):
        prod_sup = profile.mu.value * e_hi
    else:
        lo1, hi1 = _sampling_window(profile.epsilon, profile.classification)
        lo2, hi2 = _sampling_window(profile.mu, profile.classification)
        lo, hi = min(lo1, lo2), max(hi1, hi2)
        zs = np.linspace(lo, hi, 20001)
        prod = np.asarray(profile.epsilon.eval(zs, 0)) * np.asarray(profile.mu.eval(zs, 0))
        lip = profile.epsilon.derivative_sup() * m_hi + profile.mu.derivative_sup() * e_hi
        prod_sup = float(np.max(prod)) + 0.5 * (zs[1] - zs[0]) * lip
        for fam in (profile.epsilon, profile.mu):
            for p in _candidate_points(fam, lo, hi):
                prod_sup = max(prod_sup, fam_product(profile, p))
        if isinstance(profile.classification, Stabilizing):
            prod_sup = max(prod_sup, profile.limit_product)
    return EssentialBounds(e_lo, e_hi, m_lo, m_hi, float(prod_sup))


def fam_product(profile: CoefficientProfile, z: float) -> float:
    return float(profile.epsilon.eval(z, 0)) * float(profile.mu.eval(z, 0))


@dataclass(frozen=True)
class ProductComparison:
    """Verdict of the pointwise test eps(z) mu(z) <= eps* mu*."""

    exceeds_limit: bool
    witness: float | None
    observed_max: float
    limit: float


def locate_product_excess(profile: CoefficientProfile, n: int = 40001) -> ProductComparison:
    """Decide whether eps*mu stays below its limit product everywhere.

    A strict sample above the limit is a sound witness (returned after a
    local golden-section polish).  The everywhere-below verdict is a
    dense-grid certificate on the window containing all bump supports.
    """
    if not isinstance(profile.classification, Stabilizing):
        raise ValidationError("product comparison applies to stabilizing profiles only")
    limit = profile.limit_product
    lo1, hi1 = _sampling_window(profile.epsilon, profile.classification)
    lo2, hi2 = _sampling_window(profile.mu, profile.classification)
    lo, hi = min(lo1, lo2), max(hi1, hi2)
    zs = np.linspace(lo, hi, n)
    prod = np.asarray(profile.epsilon.eval(zs, 0)) * np.asarray(profile.mu.eval(zs, 0))
    i = int(np.argmax(prod))
    best = float(prod[i])
    if best <= limit * (1.0 + 1e-13):
        return ProductComparison(False, None, best, limit)

    # polish the witness: golden-section maximization on the bracketing cell
    h = zs[1] - zs[0]
    a, b = zs[max(i - 1, 0)], zs[min(i + 1, n - 1)]
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - gr * (b - a), a + gr * (b - a)
    fc, fd = fam_product(profile, c), fam_product(profile, d)
    for _ in range(80):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = fam_product(profile, c)
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = fam_product(profile, d)
    z0 = 0.5 * (a + b)
    return ProductComparison(True, float(z0), fam_product(profile, z0), limit)


_FAMILY_TAGS = {
    "constant": Constant,
    "gaussian_bump": GaussianBump,
    "sech2_bump": Sech2Bump,
    "cosine_periodic": CosinePeriodic,
}


def family_from_dict(doc: dict) -> ProfileFamily:
    if not isinstance(doc, dict) or "family" not in doc:
        raise ValidationError(f"profile family must be an object with a 'family' tag, got {doc!r}")
    tag = doc["family"]
    if tag == "sum":
        terms = doc.get("terms")
        if not isinstance(terms, list) or not terms:
            raise ValidationError("sum family needs a non-empty 'terms' list")
        return ProfileSum([family_from_dict(t) for t in terms])
    cls = _FAMILY_TAGS.get(tag)
    if cls is None:
        raise ValidationError(f"unknown profile family '{tag}'")
    kwargs = {k: v for k, v in doc.items() if k != "family"}
    try:
        return cls(**{k: float(v) for k, v in kwargs.items()})
    except TypeError as exc:
        raise ValidationError(f"bad parameters for family '{tag}': {exc}") from None


def family_to_dict(fam: ProfileFamily) -> dict:
    if isinstance(fam, Constant):
        return {"family": "constant", "value": fam.value}
    if isinstance(fam, GaussianBump):
        return {"family": "gaussian_bump", "base": fam.base, "amplitude": fam.amplitude,
                "center": fam.center, "width": fam.width}
    if isinstance(fam, Sech2Bump):
        return {"family": "sech2_bump", "base": fam.base, "amplitude": fam.amplitude,
                "center": fam.center, "width": fam.width}
    if isinstance(fam, CosinePeriodic):
        return {"family": "cosine_periodic", "mean": fam.mean, "amplitude": fam.amplitude,
                "period": fam.period}
    if isinstance(fam, ProfileSum):
        return {"family": "sum", "terms": [family_to_dict(t) for t in fam.terms_]}
    raise ValidationError(f"unknown family {fam!r}")
