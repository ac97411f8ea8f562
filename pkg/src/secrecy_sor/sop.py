"""Secrecy outage probability (SOP) against randomly placed eavesdroppers.

Each of ``n_eves`` eavesdroppers sits independently in a suspicious annular
sector: angle uniform on an interval, distance with the area-uniform law
2z/(d_max^2 - d_min^2).  Secrecy fails when any of them lands inside the
outage region, so

    SOP = 1 - (1 - p1)^L,       p1 = Area(SOR intersect region) / Area(region).

Two independent routes compute this: a closed form that integrates the
crosstalk CDF radially (``sop_closed_form``), and direct geometry on a
sampled boundary (``sop_intersection``).  They must agree; the tests hold
them to it.
"""

from __future__ import annotations

import numpy as np

from .asymptotic import (
    bob_profile,
    boundary_scale,
    phi_max,
    sor_boundary_uniform,
    sor_constants,
)
from .crosstalk import (
    _cdf_batch,
    _kernel_tables,
    _max_side_lobe,
    s_max_feasible,
)
from .errors import InfeasibleRateError

_HALF_PI = 0.5 * np.pi
_trapz = getattr(np, "trapezoid", None) or np.trapz


class SuspiciousRegion:
    """Annular sector the eavesdroppers are confined to.

    Constant bounds: ``SuspiciousRegion((th_lo, th_hi), d_min, d_max)``.
    Sampled bounds: pass arrays for ``d_min``/``d_max`` together with the
    ``thetas`` they are tabulated on (piecewise-linear in between).
    """

    def __init__(self, angle_interval, d_min, d_max, thetas=None):
        lo, hi = float(angle_interval[0]), float(angle_interval[1])
        if not lo < hi:
            raise ValueError("angle interval must be nonempty")
        self.angle_interval = (lo, hi)
        self.thetas = None if thetas is None else np.asarray(thetas, dtype=float)
        if self.thetas is None:
            self.d_min = float(d_min)
            self.d_max = float(d_max)
            if not 0.0 <= self.d_min < self.d_max:
                raise ValueError("need 0 <= d_min < d_max")
        else:
            self.d_min = np.asarray(d_min, dtype=float)
            self.d_max = np.asarray(d_max, dtype=float)
            if self.thetas.shape != self.d_min.shape or \
                    self.thetas.shape != self.d_max.shape:
                raise ValueError("sampled bounds must align with their thetas")
            if np.any(np.diff(self.thetas) <= 0):
                raise ValueError("sampled thetas must be strictly increasing")
            if np.any(self.d_min < 0) or np.any(self.d_min >= self.d_max):
                raise ValueError("need 0 <= d_min < d_max pointwise")

    @property
    def is_constant(self):
        return self.thetas is None

    def bounds_at(self, thetas):
        """(d_min, d_max) profiles across an array of angles."""
        thetas = np.asarray(thetas, dtype=float)
        if self.is_constant:
            return (np.full_like(thetas, self.d_min),
                    np.full_like(thetas, self.d_max))
        return (np.interp(thetas, self.thetas, self.d_min),
                np.interp(thetas, self.thetas, self.d_max))


def _adaptive_segment(f, a, b, rtol, scale, max_doublings=11):
    """Composite-Simpson integral of a vectorized ``f`` over [a, b], doubling
    the panel count until successive estimates agree to ``rtol`` relative to
    ``scale``."""
    if b <= a:
        return 0.0
    n = 16
    xs = np.linspace(a, b, n + 1)
    fx = f(xs)
    h = (b - a) / n
    prev = h / 3.0 * (fx[0] + fx[-1] + 4.0 * np.sum(fx[1:-1:2])
                      + 2.0 * np.sum(fx[2:-1:2]))
    for _ in range(max_doublings):
        mids = 0.5 * (xs[:-1] + xs[1:])
        fm = f(mids)
        n *= 2
        h *= 0.5
        merged = np.empty(n + 1)
        merged[0::2] = fx
        merged[1::2] = fm
        xs_new = np.empty(n + 1)
        xs_new[0::2] = xs
        xs_new[1::2] = mids
        cur = h / 3.0 * (merged[0] + merged[-1] + 4.0 * np.sum(merged[1:-1:2])
                         + 2.0 * np.sum(merged[2:-1:2]))
        if abs(cur - prev) <= rtol * max(abs(cur), scale):
            return cur
        xs, fx, prev = xs_new, merged, cur
    return prev


def _branch_radii(cfg, cons):
    """Radii at which the radial integrand changes analytic branch: one per
    lobe peak of the crosstalk CDF (where a new lobe starts crossing)."""
    geom = cfg.geometry
    tables = _kernel_tables(geom.n_antennas, geom.spacing)
    peaks = [1.0] + [tables.s_peak[m] for m in range(1, tables.cap + 1)]
    out = []
    for p in peaks:
        gap = cons.scale * cfg.k_eb * p - cons.offset
        if gap > 0:
            out.append(gap ** (1.0 / cfg.alpha))
    return out


def sop_closed_form(cfg, phi, region):
    """SOP under uniform null-space jamming, by radial integration of the
    crosstalk CDF over the suspicious region (constant bounds only).

    Jamming fractions at or beyond the feasibility limit return 1.0: Bob
    cannot reach the target rate, so secrecy always fails.
    """
    if not region.is_constant:
        raise ValueError("sop_closed_form needs a constant-bound region")
    if phi < 0.0:
        raise ValueError("phi must be nonnegative")
    try:
        limit = phi_max(cfg)
    except InfeasibleRateError:
        return 1.0
    if phi >= limit:
        return 1.0
    cons = sor_constants(cfg, phi)
    d_min, d_max = region.d_min, region.d_max
    profile = bob_profile(cfg)
    angle_range = region.angle_interval

    def p_outside(z):
        lvl = (z ** cfg.alpha + cons.offset) / cons.scale
        return _cdf_batch(lvl, profile, angle_range) * 2.0 * z

    norm = d_max ** 2 - d_min ** 2
    cuts = sorted({d_min, d_max}
                  | {r for r in _branch_radii(cfg, cons) if d_min < r < d_max})
    integral = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        integral += _adaptive_segment(p_outside, a, b, 1e-6, norm * 0.01)
    p_safe = min(max(integral / norm, 0.0), 1.0)
    return 1.0 - p_safe ** cfg.n_eves


def region_area(region):
    """Area of the suspicious region."""
    lo, hi = region.angle_interval
    if region.is_constant:
        return 0.5 * (hi - lo) * (region.d_max ** 2 - region.d_min ** 2)
    inner = region.thetas[(region.thetas > lo) & (region.thetas < hi)]
    th = np.unique(np.concatenate((inner, [lo, hi])))
    d_lo, d_hi = region.bounds_at(th)
    return float(_trapz(0.5 * (d_hi ** 2 - d_lo ** 2), th))


def sor_region_overlap(boundary, region):
    """Area of the intersection of an outage region (sampled boundary) with
    the suspicious region: the boundary is clipped radially into the
    region's annular band and the clipped polar integral is taken."""
    lo, hi = region.angle_interval
    thetas = np.asarray(boundary.thetas, dtype=float)
    inside = (thetas >= lo) & (thetas <= hi)
    th = np.unique(np.concatenate((thetas[inside], [lo, hi])))
    if region.thetas is not None:
        extra = region.thetas[(region.thetas >= lo) & (region.thetas <= hi)]
        th = np.unique(np.concatenate((th, extra)))
    r = np.interp(th, thetas, boundary.radii)
    d_lo, d_hi = region.bounds_at(th)
    covered = 0.5 * np.clip(np.minimum(r, d_hi) ** 2 - d_lo ** 2, 0.0, None)
    return float(_trapz(covered, th))


def sop_intersection(boundary, region, n_eves):
    """SOP from a sampled boundary: clip the boundary radially against the
    region, take the area ratio, and account for ``n_eves`` independent
    eavesdroppers."""
    if n_eves < 1:
        raise ValueError("n_eves must be >= 1")
    area_total = region_area(region)
    if area_total <= 0:
        raise ValueError("suspicious region has zero area")
    p1 = min(max(sor_region_overlap(boundary, region) / area_total, 0.0), 1.0)
    return 1.0 - (1.0 - p1) ** n_eves


def jamming_beneficial_dmax(cfg):
    """Distance limit below which artificial noise can strictly lower the
    SOP: the no-jamming outage radius at the strongest reachable crosstalk
    over the whole front half space."""
    s_max = s_max_feasible(bob_profile(cfg), (-_HALF_PI, _HALF_PI))
    return (s_max * boundary_scale(cfg, 0.0)) ** (1.0 / cfg.alpha)


def _phi_witness_ok(cfg, phi, d_max):
    """Check the analytic improvement condition at distance ``d_max``: the
    noise floor the jamming adds must outweigh the signal-side boundary
    growth at the angle whose no-jamming boundary passes through d_max."""
    a2 = boundary_scale(cfg, 0.0)
    a1 = boundary_scale(cfg, phi)
    z_a = d_max ** cfg.alpha
    if z_a >= a2:
        return False
    return phi * cfg.p_tilde_tot > (a1 - a2) * z_a / (a2 - z_a)


def is_jamming_beneficial(cfg, region, phi_points=400):
    """Decide whether any jamming fraction strictly lowers the SOP for this
    region, and exhibit one when it does.

    Returns ``(False, None)`` when the region extends past the benefit
    limit.  Otherwise searches a jamming-fraction grid and returns
    ``(True, phi)`` with ``sop(phi) < sop(0)``, preferring fractions that
    also satisfy the analytic improvement condition at ``d_max``.
    """
    if not region.is_constant:
        raise ValueError("is_jamming_beneficial needs a constant-bound region")
    if region.d_max >= jamming_beneficial_dmax(cfg):
        return False, None
    base = sop_closed_form(cfg, 0.0, region)
    limit = phi_max(cfg)
    grid = np.linspace(0.0, limit, phi_points + 1)[1:-1]
    sops = np.array([sop_closed_form(cfg, p, region) for p in grid])
    better = sops < base - 1e-12
    if not np.any(better):
        return False, None
    ok = np.array([better[i] and _phi_witness_ok(cfg, grid[i], region.d_max)
                   for i in range(len(grid))])
    pool = np.where(ok)[0] if np.any(ok) else np.where(better)[0]
    pick = pool[int(np.argmin(sops[pool]))]
    return True, float(grid[pick])
