"""Assembly of the full cylinder spectrum from one-dimensional modes.

The squared field operator decomposes over the transverse modes: each
Dirichlet eigenvalue drives an electric-type axial problem, each
nonzero Neumann eigenvalue a magnetic-type one, and a cross-section
with multiple boundary components contributes 2(N-1) copies of the
mode-constant-zero problem.  This module decides which modes can carry
spectrum below a requested energy (mode_budget), runs the axial solver
per distinct mode constant, takes unions, and maps the result to the
symmetric +/- spectrum of the first-order operator by exact negation,
so the reported set is symmetric to the last bit.

Deduplication is by exact float equality of (flavor, mode constant):
duplicate transverse eigenvalues come out of identical arithmetic
(symmetric lattice pairs, double Bessel multiplicities), so they are
bitwise equal and a tolerance would only risk merging distinct modes.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cross_section import CrossSectionSpectrum
from .errors import InsufficientDataError, ValidationError
from .liouville import LiouvilleData, build_potential, build_transform
from .profiles import (
    CoefficientProfile,
    EssentialBounds,
    Periodic,
    Stabilizing,
    essential_bounds,
)
from .schrodinger import BandStructure, BoundStateResult, band_structure, bound_states

__all__ = [
    "ModeBudget",
    "mode_budget",
    "ModeGroup",
    "StabilizingModeResult",
    "PeriodicModeResult",
    "SpectralPoint",
    "GapReport",
    "SpectrumReport",
    "run_stabilizing_analysis",
    "run_periodic_analysis",
    "FiniteGapCertificate",
    "finite_gap_certificate",
]


# ---------------------------------------------------------------------------
# mode budget
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModeBudget:
    """Transverse modes that can carry squared-operator spectrum <= e_max.

    A mode with constant c contributes nothing below c / sup(eps mu),
    so the cut is c <= e_max * sup(eps mu).  Multiplicities are kept:
    the constants tuples repeat values exactly as the cross-section
    lists do.
    """

    e_max: float
    product_sup: float
    electric_constants: tuple[float, ...]
    magnetic_constants: tuple[float, ...]  # from the second Neumann value on
    include_zero_branch: bool
    zero_multiplicity: int


def mode_budget(
    spectrum: CrossSectionSpectrum, bounds: EssentialBounds, e_max: float
) -> ModeBudget:
    if not e_max > 0:
        raise ValidationError("e_max must be positive")
    cut = e_max * bounds.product_sup

    lam = list(spectrum.dirichlet)
    if lam and lam[-1] <= cut:
        raise InsufficientDataError(
            f"last Dirichlet eigenvalue {lam[-1]:.6g} is still inside the budget cut "
            f"{cut:.6g}; provide more transverse eigenvalues"
        )
    el = tuple(x for x in lam if x <= cut)

    kap = list(spectrum.neumann)
    if kap and kap[-1] <= cut:
        raise InsufficientDataError(
            f"last Neumann eigenvalue {kap[-1]:.6g} is still inside the budget cut "
            f"{cut:.6g}; provide more transverse eigenvalues"
        )
    mag = tuple(x for x in kap[1:] if x <= cut)

    n = spectrum.boundary_components
    return ModeBudget(
        e_max=float(e_max),
        product_sup=float(bounds.product_sup),
        electric_constants=el,
        magnetic_constants=mag,
        include_zero_branch=n >= 2,
        zero_multiplicity=max(0, 2 * n - 2),
    )


# ---------------------------------------------------------------------------
# per-mode results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModeGroup:
    flavor: str  # 'el' | 'm' | 'zero'
    mode_constant: float
    multiplicity: int
    indices: tuple[int, ...]  # 1-based positions in the transverse list


@dataclass(frozen=True)
class StabilizingModeResult:
    group: ModeGroup
    threshold: float
    lower_bound: float
    bound: BoundStateResult
    ac_interval: tuple[float, float] | None  # clipped to e_max, None if empty


@dataclass(frozen=True)
class PeriodicModeResult:
    group: ModeGroup
    lower_bound: float
    structure: BandStructure


def _grouped_modes(budget: ModeBudget) -> list[ModeGroup]:
    groups: dict[tuple[str, float], list[int]] = {}
    for i, c in enumerate(budget.electric_constants, start=1):
        groups.setdefault(("el", c), []).append(i)
    for j, c in enumerate(budget.magnetic_constants, start=2):
        groups.setdefault(("m", c), []).append(j)
    out = [
        ModeGroup(flavor=f, mode_constant=c, multiplicity=len(ix), indices=tuple(ix))
        for (f, c), ix in groups.items()
    ]
    if budget.include_zero_branch:
        out.append(
            ModeGroup(
                flavor="zero",
                mode_constant=0.0,
                multiplicity=budget.zero_multiplicity,
                indices=(0,),
            )
        )
    out.sort(key=lambda g: (g.mode_constant, g.flavor))
    return out


# ---------------------------------------------------------------------------
# report structures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralPoint:
    energy: float  # squared-operator energy
    flavor: str
    mode_constant: float
    indices: tuple[int, ...]
    multiplicity: int
    embedded: bool  # inside the ac/band support of other modes
    outside_support: bool  # below every continuous-spectrum interval
    refinement_estimate: float


@dataclass(frozen=True)
class GapReport:
    lower: float
    upper: float
    possibly_closed: bool  # width below the reporting threshold


@dataclass(frozen=True)
class SpectrumReport:
    classification: str  # 'stabilizing' | 'periodic'
    e_max: float
    boundary_components: int
    budget: ModeBudget
    modes: tuple
    squared_support: tuple[tuple[float, float], ...]
    squared_points: tuple[SpectralPoint, ...]
    squared_gaps: tuple[GapReport, ...]
    central_gap: tuple[float, float] | None  # in the first-order variable
    maxwell_support: tuple[tuple[float, float], ...]
    maxwell_points: tuple[float, ...]


_MERGE_TOL = 1e-9
_GAP_REPORT_TOL = 1e-6


def _merge_intervals(intervals, tol=_MERGE_TOL):
    out: list[list[float]] = []
    for lo, hi in sorted(intervals):
        if out and lo - out[-1][1] <= tol:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [(a, b) for a, b in out]


def _union_gaps(intervals):
    gaps = []
    for (a, b), (c, d) in zip(intervals[:-1], intervals[1:]):
        if c > b:
            gaps.append(GapReport(lower=b, upper=c, possibly_closed=(c - b) < _GAP_REPORT_TOL))
    return gaps


def _symmetrize(intervals, points):
    """Map squared-operator support to the symmetric first-order one.

    Interval ends and points go through one sqrt each; negatives are
    exact negations of the same floats, so symmetry is bitwise.
    """
    pos = [(math.sqrt(max(a, 0.0)), math.sqrt(max(b, 0.0))) for a, b in intervals]
    mirrored = [(-b, -a) for a, b in pos]
    support = sorted(mirrored + pos)
    support = _merge_intervals(support, tol=0.0)
    pts = []
    for e in points:
        r = math.sqrt(max(e, 0.0))
        pts.extend((-r, r))
    return tuple(support), tuple(sorted(pts))


# ---------------------------------------------------------------------------
# analysis drivers
# ---------------------------------------------------------------------------


def _settled_halfwidth(
    data: LiouvilleData, initial: float, c_max: float, attempts: int = 6
):
    """Smallest halfwidth from the growth ladder where every budgeted
    potential has settled: |V - threshold| <= curvature + c * drift at
    the window ends, bounded here with the largest mode constant."""
    for k in range(attempts):
        cand = initial * (1.3**k)
        if data.y_lo > -cand or data.y_hi < cand:
            return None
        ends = np.array([-cand, cand])
        v = np.abs(np.asarray(data.curvature_term(ends)))
        prod = np.asarray(data.product_tilde(ends))
        drift = np.abs(1.0 / prod - 1.0 / data.profile.limit_product)
        if float(np.max(v + c_max * drift)) < 5e-9:
            return cand
    return None


def _transform_for(profile: CoefficientProfile, halfwidth: float, bounds: EssentialBounds):
    lo_speed = math.sqrt(bounds.eps_lower * bounds.mu_lower)
    z_half = halfwidth * 1.3**6 / lo_speed * 1.05 + 1.0
    return build_transform(profile, window=(-z_half, z_half))


def run_stabilizing_analysis(
    profile: CoefficientProfile,
    spectrum: CrossSectionSpectrum,
    e_max: float,
    *,
    halfwidth: float = 15.0,
    grid: int = 3000,
    jobs: int | None = None,
) -> SpectrumReport:
    """Full squared-spectrum analysis for stabilizing coefficients."""
    if not isinstance(profile.classification, Stabilizing):
        raise ValidationError("profile is not stabilizing")
    bounds = essential_bounds(profile)
    budget = mode_budget(spectrum, bounds, e_max)
    groups = _grouped_modes(budget)
    data = _transform_for(profile, halfwidth, bounds)
    constants = (0.0,) + budget.electric_constants + budget.magnetic_constants
    settled = _settled_halfwidth(data, halfwidth, max(constants))
    if settled is None:
        raise ValidationError(
            "could not settle the potential tails inside the transform window; "
            "the coefficients approach their limits too slowly for this halfwidth"
        )

    def solve(group: ModeGroup) -> StabilizingModeResult:
        pot = build_potential(
            data,
            group.flavor,
            group.mode_constant,
            index=group.indices[0],
            n_boundary=spectrum.boundary_components,
        )
        res = bound_states(pot, settled, grid)
        thr = pot.threshold
        ac = (thr, e_max) if thr < e_max else None
        return StabilizingModeResult(
            group=group,
            threshold=thr,
            lower_bound=pot.lower_bound,
            bound=res,
            ac_interval=ac,
        )

    if jobs and jobs > 1 and len(groups) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(solve, groups))
    else:
        results = [solve(g) for g in groups]

    supports = [r.ac_interval for r in results if r.ac_interval is not None]
    union = _merge_intervals(supports)
    thresholds = [r.threshold for r in results]

    points: list[SpectralPoint] = []
    for r in results:
        min_other = min(
            (t for j, t in enumerate(thresholds) if results[j] is not r), default=math.inf
        )
        for e, est in zip(r.bound.eigenvalues, r.bound.refinement_estimate):
            if e > e_max:
                continue
            embedded = e >= min_other
            outside = all(e < t for t in thresholds)
            points.append(
                SpectralPoint(
                    energy=float(e),
                    flavor=r.group.flavor,
                    mode_constant=r.group.mode_constant,
                    indices=r.group.indices,
                    multiplicity=r.group.multiplicity,
                    embedded=embedded,
                    outside_support=outside,
                    refinement_estimate=float(est),
                )
            )
    points.sort(key=lambda p: (p.energy, p.mode_constant, p.flavor))

    inf_sq = min(
        [t for t in thresholds if t <= e_max] + [p.energy for p in points],
        default=math.inf,
    )
    central = None
    if spectrum.boundary_components == 1 and math.isfinite(inf_sq) and inf_sq > 0:
        r = math.sqrt(inf_sq)
        central = (-r, r)

    msupport, mpoints = _symmetrize(union, [p.energy for p in points])
    return SpectrumReport(
        classification="stabilizing",
        e_max=float(e_max),
        boundary_components=spectrum.boundary_components,
        budget=budget,
        modes=tuple(results),
        squared_support=tuple(union),
        squared_points=tuple(points),
        squared_gaps=tuple(_union_gaps(union)),
        central_gap=central,
        maxwell_support=msupport,
        maxwell_points=mpoints,
    )


def run_periodic_analysis(
    profile: CoefficientProfile,
    spectrum: CrossSectionSpectrum,
    e_max: float,
    *,
    jobs: int | None = None,
) -> SpectrumReport:
    """Full squared-spectrum analysis for periodic coefficients."""
    if not isinstance(profile.classification, Periodic):
        raise ValidationError("profile is not periodic")
    bounds = essential_bounds(profile)
    budget = mode_budget(spectrum, bounds, e_max)
    groups = _grouped_modes(budget)
    data = build_transform(profile)

    def solve(group: ModeGroup) -> PeriodicModeResult:
        pot = build_potential(
            data,
            group.flavor,
            group.mode_constant,
            index=group.indices[0],
            n_boundary=spectrum.boundary_components,
        )
        bs = band_structure(pot, e_max)
        return PeriodicModeResult(group=group, lower_bound=pot.lower_bound, structure=bs)

    if jobs and jobs > 1 and len(groups) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(solve, groups))
    else:
        results = [solve(g) for g in groups]

    intervals = []
    for r in results:
        intervals.extend(r.structure.bands)
    union = _merge_intervals(intervals)

    inf_sq = min((r.structure.bands[0][0] for r in results if r.structure.bands), default=math.inf)
    central = None
    if spectrum.boundary_components == 1 and math.isfinite(inf_sq) and inf_sq > 0:
        rr = math.sqrt(inf_sq)
        central = (-rr, rr)

    msupport, mpoints = _symmetrize(union, [])
    return SpectrumReport(
        classification="periodic",
        e_max=float(e_max),
        boundary_components=spectrum.boundary_components,
        budget=budget,
        modes=tuple(results),
        squared_support=tuple(union),
        squared_points=(),
        squared_gaps=tuple(_union_gaps(union)),
        central_gap=central,
        maxwell_support=msupport,
        maxwell_points=mpoints,
    )


# ---------------------------------------------------------------------------
# finite-gap certificate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteGapCertificate:
    verified: bool
    reason: str
    coverage_start: float  # K: no gaps of the union beyond this energy
    e_max: float
    n_asymptotic: int  # N: bands from this index on track the free pattern
    delta: float
    w_low: float
    w_high: float
    max_edge_deviation: float  # over bands n >= N, both structures


def finite_gap_certificate(
    low: BandStructure, high: BandStructure, e_max: float | None = None
) -> FiniteGapCertificate:
    """Certify that the two-mode band union has no gaps in [K, e_max].

    The two structures must share the period.  With w_k the mean
    potentials, delta = (w_high - w_low) / 4 splits the asymptotic edge
    patterns pi^2 n^2 / b^2 + w_k of the two structures; once both edge
    families deviate from their pattern by less than delta (from band N
    on, with (2N+1) pi^2 > (w_high - w_low + 2 delta) b^2 so the free
    spacing dominates), every point above K = pi^2 N^2 / b^2 + w_high +
    delta lies inside one of the two families' bands.  The conclusion
    is then verified directly on a grid of step 1e-3.
    """
    b = low.period_b
    if abs(high.period_b - b) > 1e-12 * max(1.0, b):
        raise ValidationError("band structures have different periods")
    w1, w2 = low.mean_potential, high.mean_potential
    if w2 < w1:
        low, high = high, low
        w1, w2 = w2, w1
    sep = w2 - w1
    if sep <= 0:
        raise ValidationError("mean potentials coincide; certificate needs distinct modes")
    delta = sep / 4.0
    cap = min(low.e_max, high.e_max)
    if e_max is None:
        e_max = cap
    if e_max > cap + 1e-12:
        raise ValidationError("e_max exceeds the analyzed range of the band structures")

    n_spacing = 1
    while (2 * n_spacing + 1) * math.pi**2 <= (sep + 2.0 * delta) * b * b:
        n_spacing += 1

    pairs1 = low.eigenvalue_band_edges
    pairs2 = high.eigenvalue_band_edges
    n_avail = min(len(pairs1), len(pairs2))

    def deviation(n: int) -> float:
        d = 0.0
        for pairs, w in ((pairs1, w1), (pairs2, w2)):
            lo, hi = pairs[n - 1]
            d = max(d, abs(lo - (math.pi * (n - 1) / b) ** 2 - w))
            d = max(d, abs(hi - (math.pi * n / b) ** 2 - w))
        return d

    n_cert = None
    max_dev = math.inf
    for n0 in range(n_spacing, n_avail + 1):
        devs = [deviation(n) for n in range(n0, n_avail + 1)]
        if devs and max(devs) < delta:
            n_cert = n0
            max_dev = max(devs)
            break
    if n_cert is None:
        return FiniteGapCertificate(
            verified=False,
            reason="edge deviations never drop below delta in the analyzed range",
            coverage_start=math.nan,
            e_max=float(e_max),
            n_asymptotic=0,
            delta=delta,
            w_low=w1,
            w_high=w2,
            max_edge_deviation=math.inf,
        )

    k_start = (math.pi * n_cert / b) ** 2 + w2 + delta
    if k_start >= e_max:
        return FiniteGapCertificate(
            verified=False,
            reason=f"coverage start {k_start:.6g} is not below e_max {e_max:.6g}",
            coverage_start=k_start,
            e_max=float(e_max),
            n_asymptotic=n_cert,
            delta=delta,
            w_low=w1,
            w_high=w2,
            max_edge_deviation=max_dev,
        )

    union = _merge_intervals(list(pairs1) + list(pairs2), tol=0.0)
    boundaries = np.array([x for lo, hi in union for x in (lo, hi)])
    es = np.arange(k_start, e_max, 1e-3)
    es = np.append(es, e_max)
    # inside some interval iff searchsorted index is odd
    idx = np.searchsorted(boundaries, es)
    covered = idx % 2 == 1
    on_edge = np.isin(es, boundaries)
    ok = bool(np.all(covered | on_edge))
    first_bad = float(es[~(covered | on_edge)][0]) if not ok else math.nan
    return FiniteGapCertificate(
        verified=ok,
        reason="verified" if ok else f"energy {first_bad:.6f} in [K, e_max] is uncovered",
        coverage_start=k_start,
        e_max=float(e_max),
        n_asymptotic=n_cert,
        delta=delta,
        w_low=w1,
        w_high=w2,
        max_edge_deviation=max_dev,
    )
