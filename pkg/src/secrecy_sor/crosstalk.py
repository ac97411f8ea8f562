"""Array steering, the angular crosstalk kernel, and its distribution.

For a uniform linear array with ``n`` elements at spacing ``d`` (in carrier
wavelengths), two directions whose sines differ by ``x`` couple through

    s(x) = sin^2(n pi d x) / (n^2 sin^2(pi d x)),       s(0) = 1.

``s`` is the squared, normalized inner product of the two steering vectors.
It is periodic in ``x`` with period ``1/d``, symmetric about half a period,
and on the first half period consists of a main lobe of (sine-domain) width
``2/(n d)`` followed by side lobes of width ``1/(n d)`` whose peaks decrease.

Under strong line of sight, the effective crosstalk between an eavesdropper
at angle ``theta`` and a receiver at ``theta_ref`` is ``K * s(|sin theta -
sin theta_ref|)`` where ``K`` is the product of Rician-dominance factors
``K_i K_j / ((1+K_i)(1+K_j))``.  With ``theta`` uniform on an interval, the
induced distribution of the crosstalk has a closed form built from the lobe
landmarks of ``s``; that CDF is the workhorse of every outage probability
here.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import bisect

_HALF_PI = 0.5 * np.pi
# Sample count per monotone half lobe in the cached inverse-kernel tables.
_HALF_LOBE_SAMPLES = 2049


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array: element count and spacing in wavelengths."""

    n_antennas: int
    spacing: float

    def __post_init__(self):
        if int(self.n_antennas) != self.n_antennas or self.n_antennas < 2:
            raise ValueError("n_antennas must be an integer >= 2")
        if not (0.0 < self.spacing <= 1.0):
            raise ValueError("spacing must lie in (0, 1] wavelengths")


@dataclass(frozen=True)
class CrosstalkProfile:
    """Crosstalk model between a reference direction and a random angle.

    ``k_factor_product`` is K_i K_j / ((1+K_i)(1+K_j)) for the two links'
    Rician factors; it scales the kernel into the physical crosstalk.
    ``n_side_lobes`` caps how many side lobes the distribution keeps track
    of; ``None`` selects the default count for the geometry (capped at the
    number of representable lobes).
    """

    geometry: ArrayGeometry
    theta_ref: float
    k_factor_product: float
    n_side_lobes: int | None = None

    def __post_init__(self):
        if not (abs(self.theta_ref) <= _HALF_PI):
            raise ValueError("theta_ref must lie in [-pi/2, pi/2]")
        if not (0.0 <= self.k_factor_product <= 1.0):
            raise ValueError("k_factor_product must lie in [0, 1]")
        if self.n_side_lobes is not None and self.n_side_lobes < 1:
            raise ValueError("n_side_lobes must be >= 1 when given")


@dataclass
class LobeLandmarks:
    """Where the kernel crosses a level u.

    ``peak_values[m]`` is the height of lobe ``m`` (index 0 = main lobe).
    ``cross_points_main`` is the offset where the main lobe falls through u.
    ``cross_points_side[m-1]`` is the ``(rising, falling)`` crossing pair of
    side lobe ``m``, or ``None`` when that lobe stays below u.
    """

    peak_values: list
    cross_points_main: float
    cross_points_side: list


def steering_vector(theta, geom):
    """Unit-modulus array response for direction ``theta`` (radians).

    Element ``k`` is exp(-2j pi k d sin(theta)); the squared norm is the
    element count.
    """
    if not abs(theta) <= _HALF_PI:
        raise ValueError("theta must lie in [-pi/2, pi/2]")
    phase = -2j * np.pi * geom.spacing * np.sin(theta)
    return np.exp(phase * np.arange(geom.n_antennas))


def s_kernel(x, geom):
    """Crosstalk kernel at sine-domain offset ``x`` (scalar or array).

    Removable singularities (offsets that are a multiple of the period
    ``1/spacing``, including 0) evaluate to 1.
    """
    x = np.asarray(x, dtype=float)
    n = geom.n_antennas
    frac = geom.spacing * x
    # reduce to the nearest period before touching sin: evaluating at
    # pi*frac directly loses the removable singularities at integer frac
    # to rounding (sin(pi*k) is not 0.0 in floats)
    delta = frac - np.round(frac)
    t = np.pi * delta
    st = np.sin(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.sin(n * t) / (n * st)
        val = ratio * ratio
    val = np.where(delta == 0.0, 1.0, val)
    if val.ndim == 0:
        return float(val)
    return val


def normalized_crosstalk(theta_i, profile):
    """Crosstalk K * s(|sin theta_i - sin theta_ref|) for a concrete angle."""
    theta_i = np.asarray(theta_i, dtype=float)
    if not np.all(np.abs(theta_i) <= _HALF_PI):
        raise ValueError("theta_i must lie in [-pi/2, pi/2]")
    delta = np.abs(np.sin(theta_i) - np.sin(profile.theta_ref))
    out = profile.k_factor_product * s_kernel(delta, profile.geometry)
    if np.ndim(theta_i) == 0:
        return float(out)
    return out


def _max_side_lobe(geom):
    """Largest side-lobe index on the decreasing branch that is physically
    reachable (peak offset at most 2 in the sine domain)."""
    lim = min(geom.n_antennas / 2.0, 2.0 * geom.n_antennas * geom.spacing)
    m = int(np.floor(lim - 0.5))
    if m + 0.5 > lim:
        m -= 1
    return max(m, 0)


def peak_value(m, geom, simplified=False):
    """Peak height of lobe ``m`` (1.0 for the main lobe).

    The default uses the exact lobe-midpoint envelope 1/(n sin(pi(m+1/2)/n))^2;
    ``simplified=True`` selects the large-array limit 1/(pi(m+1/2))^2.  Lobes
    past the decreasing branch or outside the physical offset range raise.
    """
    if m != int(m) or m < 0:
        raise ValueError("lobe index must be a nonnegative integer")
    m = int(m)
    if m == 0:
        return 1.0
    if m > _max_side_lobe(geom):
        raise ValueError(
            f"side lobe {m} is not representable for this geometry "
            f"(max {_max_side_lobe(geom)})"
        )
    if simplified:
        return 1.0 / (np.pi * (m + 0.5)) ** 2
    n = geom.n_antennas
    return 1.0 / (n * np.sin(np.pi * (m + 0.5) / n)) ** 2


def _resolve_side_lobes(profile):
    """Side-lobe count the distribution tracks: the user's cap, else the
    default for the geometry, both limited to representable lobes."""
    geom = profile.geometry
    cap = _max_side_lobe(geom)
    if profile.n_side_lobes is not None:
        return min(profile.n_side_lobes, cap)
    span = geom.n_antennas * geom.spacing * (1.0 + abs(np.sin(profile.theta_ref)))
    return min(max(int(np.floor(span)) - 1, 1), cap)


class _KernelTables:
    """Per-geometry lobe landmarks plus dense inverse tables.

    For each side lobe the kernel restricted to a half lobe is monotone, so
    its inverse (level -> offset) can be tabulated once and evaluated for
    whole arrays of levels with ``np.interp``.  ``cross_points`` itself uses
    bisection for full precision; these tables serve the vectorized CDF.
    """

    def __init__(self, n_antennas, spacing):
        geom = ArrayGeometry(n_antennas, spacing)
        self.geom = geom
        cap = _max_side_lobe(geom)
        self.cap = cap
        width = 1.0 / (n_antennas * spacing)
        self.first_null = width

        # Main lobe: s falls from 1 at 0 to 0 at the first null.
        x_main = np.linspace(0.0, width, 2 * _HALF_LOBE_SAMPLES)
        s_main = s_kernel(x_main, geom)
        # reversed so the interpolation abscissa is ascending in s
        self.main_s = np.maximum.accumulate(s_main[::-1].copy())
        self.main_x = x_main[::-1].copy()

        self.x_peak = np.zeros(cap + 1)
        self.s_peak = np.zeros(cap + 1)
        self.s_peak[0] = 1.0
        self.rise_s, self.rise_x = [None], [None]
        self.fall_s, self.fall_x = [None], [None]
        for m in range(1, cap + 1):
            lo = m * width
            hi = (m + 1) * width
            xp = _ternary_max(lambda x: s_kernel(x, geom), lo, hi)
            self.x_peak[m] = xp
            self.s_peak[m] = s_kernel(xp, geom)
            xr = np.linspace(lo, xp, _HALF_LOBE_SAMPLES)
            xf = np.linspace(xp, hi, _HALF_LOBE_SAMPLES)
            self.rise_s.append(np.maximum.accumulate(s_kernel(xr, geom)))
            self.rise_x.append(xr)
            self.fall_s.append(np.maximum.accumulate(s_kernel(xf, geom)[::-1].copy()))
            self.fall_x.append(xf[::-1].copy())

    def lobe_bounds(self, m):
        width = self.first_null
        return m * width, (m + 1) * width, self.x_peak[m], self.s_peak[m]


def _ternary_max(f, lo, hi, tol=1e-13):
    """Golden-section maximizer for a unimodal function on [lo, hi]."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol * max(1.0, abs(lo) + abs(hi)):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


@lru_cache(maxsize=32)
def _kernel_tables(n_antennas, spacing):
    return _KernelTables(n_antennas, spacing)


def cross_points(u, profile):
    """Offsets where the kernel crosses level ``u`` (0 < u < 1).

    Root-finding is bisection on each monotone half lobe, to 1e-12 in the
    offset.  Side lobes whose (true, numerically located) peak stays below
    ``u`` get ``None`` instead of a crossing pair.
    """
    if not (0.0 < u < 1.0):
        raise ValueError("level u must lie strictly between 0 and 1")
    geom = profile.geometry
    m_count = _resolve_side_lobes(profile)
    tables = _kernel_tables(geom.n_antennas, geom.spacing)
    peaks = [peak_value(m, geom) for m in range(m_count + 1)]

    def f(x):
        return s_kernel(x, geom) - u

    cp_main = bisect(f, 0.0, tables.first_null, xtol=1e-12)
    side = []
    for m in range(1, m_count + 1):
        lo, hi, xp, sp = tables.lobe_bounds(m)
        if sp > u:
            c1 = bisect(f, lo, xp, xtol=1e-12)
            c2 = bisect(f, xp, hi, xtol=1e-12)
            side.append((c1, c2))
        else:
            side.append(None)
    return LobeLandmarks(peaks, cp_main, side)


def _clipped_range(angle_range):
    lo, hi = angle_range
    lo = max(float(lo), -_HALF_PI)
    hi = min(float(hi), _HALF_PI)
    if not lo < hi:
        raise ValueError("angle range must be a nonempty interval")
    return lo, hi


def delta_cdf(z, theta_ref, angle_range):
    """CDF of Delta = |sin theta - sin theta_ref| for theta uniform on the
    (clipped) angle range.  Accepts scalar or array ``z``; negative z -> 0.
    """
    lo, hi = _clipped_range(angle_range)
    z = np.asarray(z, dtype=float)
    sr = np.sin(theta_ref)
    upper = np.minimum(np.arcsin(np.minimum(1.0, sr + np.maximum(z, 0.0))), hi)
    lower = np.maximum(np.arcsin(np.maximum(-1.0, sr - np.maximum(z, 0.0))), lo)
    val = np.clip(upper - lower, 0.0, None) / (hi - lo)
    val = np.where(z < 0.0, 0.0, val)
    if val.ndim == 0:
        return float(val)
    return val


def _delta_span(profile, angle_range):
    """Reachable interval of Delta = |sin theta - sin theta_ref| given the
    angle range."""
    lo, hi = _clipped_range(angle_range)
    s_lo, s_hi = np.sin(lo), np.sin(hi)
    sr = np.sin(profile.theta_ref)
    d_hi = max(abs(s_lo - sr), abs(s_hi - sr))
    d_lo = 0.0 if s_lo <= sr <= s_hi else min(abs(s_lo - sr), abs(s_hi - sr))
    return d_lo, d_hi


def _image_maps(period, d_hi):
    """Transforms mapping the kernel's first half period onto all reachable
    offsets: the kernel is periodic with period ``1/spacing`` and symmetric
    about each half period, so every offset is ``k*period + x`` or
    ``(k+1)*period - x`` for some x in [0, period/2]."""
    maps = []
    k = 0
    while k * period < d_hi + 1e-15:
        maps.append((False, k * period))        # x -> offset + x
        maps.append((True, (k + 1) * period))   # x -> offset - x
        k += 1
    return maps


def _image_interval(mirror, offset, a, b):
    """Image of the interval (a, b) under one symmetry transform."""
    if mirror:
        return offset - b, offset - a
    return offset + a, offset + b


def _uncovered_floor(profile, m_count, d_lo, d_hi):
    """Highest peak among representable lobes past the tracked count whose
    images still intersect the reachable offsets.  Zero when coverage is
    complete (the default lobe count for full-branch geometries)."""
    geom = profile.geometry
    tables = _kernel_tables(geom.n_antennas, geom.spacing)
    period = 1.0 / geom.spacing
    floor = 0.0
    for m in range(m_count + 1, tables.cap + 1):
        lo, hi, _, sp = tables.lobe_bounds(m)
        lo, hi = lo, min(hi, 0.5 * period)
        for mirror, off in _image_maps(period, d_hi):
            i_lo, i_hi = _image_interval(mirror, off, lo, hi)
            if i_lo < d_hi - 1e-15 and i_hi > d_lo + 1e-15:
                floor = max(floor, sp)
                break
    return floor


def _cdf_batch(x, profile, angle_range):
    """Vectorized crosstalk CDF.

    Same math as the scalar path but the per-lobe level crossings come from
    the cached inverse tables, so thousands of levels cost a handful of
    ``np.interp`` calls.  The above-level set of offsets is the union of the
    main-lobe core, the tracked side-lobe brackets, and their mirror/periodic
    images; its probability is summed with ``delta_cdf`` differences.
    """
    geom = profile.geometry
    k = profile.k_factor_product
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("crosstalk level must be nonnegative")
    if k == 0.0:
        return np.ones_like(x)

    u = x / k
    tables = _kernel_tables(geom.n_antennas, geom.spacing)
    m_count = _resolve_side_lobes(profile)
    d_lo, d_hi = _delta_span(profile, angle_range)
    period = 1.0 / geom.spacing

    floor = _uncovered_floor(profile, m_count, d_lo, d_hi)
    if floor > 0.0 and np.any((u < floor) & (u < 1.0)):
        warnings.warn(
            "crosstalk_cdf: n_side_lobes leaves reachable lobes untracked; "
            "values below their peaks are extrapolated as constants",
            stacklevel=3,
        )
    u_eval = np.clip(u, floor, None)

    def fd(z):
        return delta_cdf(z, profile.theta_ref, angle_range)

    half = 0.5 * period
    maps = _image_maps(period, d_hi)

    def add_images(contrib, a, b, span_lo, span_hi, mask):
        """Accumulate P(Delta in image) over all images of the bracket
        (a, b); (span_lo, span_hi) is the enclosing half-period interval
        used to prune unreachable images."""
        for mirror, off in maps:
            i_lo, i_hi = _image_interval(mirror, off, span_lo, span_hi)
            if i_lo >= d_hi - 1e-15 or i_hi <= d_lo + 1e-15:
                continue
            b_lo, b_hi = _image_interval(mirror, off, a, b)
            term = fd(b_hi) - fd(b_lo)
            contrib += term if mask is None else np.where(mask, term, 0.0)
        return contrib

    p_above = np.zeros_like(u_eval)
    live = u_eval < 1.0
    if np.any(live):
        ul = u_eval[live]
        contrib = np.zeros_like(ul)
        # main lobe: offsets in [0, cp0) sit above the level
        cp0 = np.interp(ul, tables.main_s, tables.main_x)
        contrib = add_images(contrib, np.zeros_like(cp0), cp0,
                             0.0, tables.first_null, None)
        for m in range(1, m_count + 1):
            lo_m, hi_m, _, sp = tables.lobe_bounds(m)
            crosses = ul < sp
            if not np.any(crosses):
                continue
            c1 = np.interp(ul, tables.rise_s[m], tables.rise_x[m])
            # the last lobe of an odd-count branch peaks exactly at the half
            # period; only its first half belongs to the base interval
            c2 = np.minimum(np.interp(ul, tables.fall_s[m], tables.fall_x[m]), half)
            contrib = add_images(contrib, c1, c2, lo_m, min(hi_m, half), crosses)
        p_above[live] = contrib
    out = np.where(u_eval >= 1.0, 0.0, p_above)
    return np.clip(1.0 - out, 0.0, 1.0)


def crosstalk_cdf(x, profile, angle_range):
    """P(crosstalk <= x) for a uniformly random angle on ``angle_range``.

    ``x`` may be a scalar or an array.  Levels at or above the profile's
    ``k_factor_product`` return 1.  When the tracked side-lobe count leaves
    reachable lobes uncovered the CDF is extrapolated as a constant below the
    highest untracked peak (with a warning) - a documented approximation that
    never triggers at the default lobe count.
    """
    scalar = np.ndim(x) == 0
    if scalar and x < 0:
        raise ValueError("crosstalk level must be nonnegative")
    out = _cdf_batch(np.atleast_1d(x), profile, angle_range)
    if scalar:
        return float(out[0])
    return out


def s_max_feasible(profile, angle_range):
    """Largest crosstalk reachable from the angle range.

    Equals ``k_factor_product`` whenever the reference angle lies inside the
    range; otherwise found by a dense scan over the reachable offsets plus a
    local refinement around the best candidate.
    """
    geom = profile.geometry
    d_lo, d_hi = _delta_span(profile, angle_range)
    if d_lo == 0.0:
        return profile.k_factor_product
    n_pts = max(512, int(64 * (d_hi - d_lo) * geom.n_antennas * geom.spacing))
    grid = np.linspace(d_lo, d_hi, n_pts)
    vals = s_kernel(grid, geom)
    i = int(np.argmax(vals))
    step = grid[1] - grid[0] if n_pts > 1 else d_hi - d_lo
    lo = max(d_lo, grid[i] - step)
    hi = min(d_hi, grid[i] + step)
    xb = _ternary_max(lambda t: s_kernel(t, geom), lo, hi)
    best = max(vals[i], s_kernel(xb, geom), s_kernel(d_lo, geom), s_kernel(d_hi, geom))
    return profile.k_factor_product * float(best)
