"""Large-array secrecy outage regions (SORs).

As the element count grows, beamforming gains harden and the region of
eavesdropper positions that defeat a target secrecy rate collapses onto a
deterministic set: a union of lobes following the crosstalk kernel.  With a
fraction ``phi`` of the transmit power spent on artificial noise in the
signal's null space, an eavesdropper at angle ``theta`` and distance ``z``
breaks secrecy iff

    z**alpha  <  scale * s_eb(theta) - offset,

where ``s_eb`` is the normalized crosstalk toward the eavesdropper and
``(scale, offset)`` depend only on the scenario and ``phi``.  This module
computes those constants, the resulting boundaries (uniform, none, and
directional jamming), their lobe decomposition, and areas.

Distances are meters, powers Watts, angles radians throughout.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .crosstalk import (
    ArrayGeometry,
    CrosstalkProfile,
    _kernel_tables,
    _max_side_lobe,
    cross_points,
    peak_value,
    s_kernel,
)
from .errors import InfeasibleRateError, ResolutionWarning

_HALF_PI = 0.5 * np.pi
# grid points per lobe arc in the default boundary discretization (odd, so
# each arc is Simpson-ready), and the point count below which area
# quadrature warns
_ARC_POINTS = 65
_MIN_ARC_POINTS = 32

_BASIS_KINDS = ("null_space_uniform", "dft_selected", "custom")


@dataclass(frozen=True)
class ScenarioConfig:
    """One transmitter/receiver scenario.

    ``k_eb`` is the Rician-dominance product for the Bob/eavesdropper pair
    (1.0 in the pure line-of-sight limit).  ``n_eves`` is the number of
    independently located eavesdroppers.
    """

    geometry: ArrayGeometry
    alpha: float
    p_tot: float
    n0: float
    r_th: float
    bob_theta: float
    bob_dist: float
    k_eb: float = 1.0
    n_eves: int = 1

    def __post_init__(self):
        if not (2.0 <= self.alpha <= 6.0):
            raise ValueError("alpha must lie in [2, 6]")
        if self.p_tot <= 0 or self.n0 <= 0:
            raise ValueError("p_tot and n0 must be positive")
        if self.r_th <= 0:
            raise ValueError("r_th must be positive")
        if not abs(self.bob_theta) <= _HALF_PI:
            raise ValueError("bob_theta must lie in [-pi/2, pi/2]")
        if self.bob_dist <= 0:
            raise ValueError("bob_dist must be positive")
        if not (0.0 <= self.k_eb <= 1.0):
            raise ValueError("k_eb must lie in [0, 1]")
        if self.n_eves < 1:
            raise ValueError("n_eves must be >= 1")

    @property
    def p_tilde_tot(self):
        """Total transmit power normalized by the noise floor."""
        return self.p_tot / self.n0


def bob_profile(cfg, n_side_lobes=None):
    """Crosstalk profile of a random angle against Bob's direction."""
    return CrosstalkProfile(cfg.geometry, cfg.bob_theta, cfg.k_eb, n_side_lobes)


class SorConstants(NamedTuple):
    """Boundary constants: radius**alpha = scale * s_eb - offset wherever
    s_eb exceeds cutoff (= offset/scale), else the radius is zero."""

    scale: float
    offset: float
    cutoff: float


@dataclass
class LobeArc:
    """One angular arc of a boundary between consecutive kernel nulls.

    ``index`` counts nulls between this arc and the main (Bob-containing)
    arc; ``lo``/``hi`` delimit the arc's slice of the boundary grid
    (inclusive; ``lo > hi`` marks an arc the grid never sampled).
    """

    index: int
    support: tuple
    max_radius: float
    lo: int = -1
    hi: int = -1


@dataclass
class SorBoundary:
    """Polar boundary d(theta) of a secrecy outage region, with its
    decomposition into lobe arcs."""

    thetas: np.ndarray
    radii: np.ndarray
    lobes: list = field(default_factory=list)


@dataclass
class PowerAllocation:
    """How the artificial-noise budget ``phi * p_tot`` is spread.

    ``basis`` selects the jamming space: ``null_space_uniform`` spreads the
    budget isotropically in the signal's null space (``beam_angles`` unused),
    while ``dft_selected`` and ``custom`` drive explicit beams whose steering
    angles are listed in ``beam_angles`` (one per entry of ``beam_powers``,
    in Watts).
    """

    phi: float
    beam_powers: np.ndarray
    basis: str
    beam_angles: np.ndarray | None = None

    def __post_init__(self):
        if self.basis not in _BASIS_KINDS:
            raise ValueError(f"basis must be one of {_BASIS_KINDS}")
        if not (0.0 <= self.phi <= 1.0):
            raise ValueError("phi must lie in [0, 1]")
        self.beam_powers = np.asarray(self.beam_powers, dtype=float)
        if np.any(self.beam_powers < 0):
            raise ValueError("beam powers must be nonnegative")
        if self.basis != "null_space_uniform":
            if self.beam_angles is None:
                raise ValueError(f"basis {self.basis!r} requires beam_angles")
            self.beam_angles = np.asarray(self.beam_angles, dtype=float)
            if self.beam_angles.shape != self.beam_powers.shape:
                raise ValueError("beam_angles and beam_powers must align")


def _check_allocation(cfg, alloc):
    budget = alloc.phi * cfg.p_tot
    total = float(np.sum(alloc.beam_powers))
    if abs(total - budget) > 1e-9 * max(budget, cfg.p_tot * 1e-12):
        raise ValueError(
            f"beam powers sum to {total:.6g} W but phi*p_tot = {budget:.6g} W"
        )


def boundary_scale(cfg, phi):
    """Eavesdropper radius**alpha per unit crosstalk when a fraction ``phi``
    of the power is diverted away from the signal (no jamming term).

    Raises when the remaining signal power cannot reach the target rate.
    """
    if not (0.0 <= phi <= 1.0):
        raise ValueError("phi must lie in [0, 1]")
    n = cfg.geometry.n_antennas
    gain = 2.0 ** cfg.r_th
    x = (1.0 - phi) * cfg.p_tilde_tot
    snr_bob = x * cfg.bob_dist ** (-cfg.alpha) * n
    denom = 1.0 + snr_bob - gain
    if denom <= 0.0:
        deficit = (gain - 1.0 - snr_bob) / max(snr_bob, np.finfo(float).tiny)
        raise InfeasibleRateError(
            f"target rate {cfg.r_th} unreachable with signal fraction "
            f"{1.0 - phi:.6g}", deficit=deficit)
    return x * n * gain / denom


def _boundary_scale_vec(cfg, phis):
    """``boundary_scale`` across an array of phi values (all must be
    feasible)."""
    phis = np.asarray(phis, dtype=float)
    n = cfg.geometry.n_antennas
    gain = 2.0 ** cfg.r_th
    x = (1.0 - phis) * cfg.p_tilde_tot
    denom = 1.0 + x * cfg.bob_dist ** (-cfg.alpha) * n - gain
    if np.any(denom <= 0.0):
        raise InfeasibleRateError(
            f"target rate {cfg.r_th} unreachable at some requested phi")
    return x * n * gain / denom


def _area_weights(thetas, arcs):
    """Quadrature weights w such that sum(w * r**2) equals the arc-by-arc
    Simpson integral of r^2/2 used by ``sor_area`` (uniform odd arcs)."""
    w = np.zeros(len(thetas))
    for arc in arcs:
        if arc.hi < arc.lo or arc.lo < 0:
            continue
        n = arc.hi - arc.lo + 1
        if n < 2:
            continue
        h = (thetas[arc.hi] - thetas[arc.lo]) / (n - 1)
        if n >= 3 and n % 2 == 1:
            seg = np.full(n, 2.0)
            seg[1::2] = 4.0
            seg[0] = seg[-1] = 1.0
            w[arc.lo:arc.hi + 1] += seg * (h / 3.0)
        else:
            seg = np.full(n, 1.0)
            seg[0] = seg[-1] = 0.5
            w[arc.lo:arc.hi + 1] += seg * h
    return 0.5 * w


def sinr_bob_uniform(cfg, phi):
    """Bob's asymptotic SINR under null-space jamming (which he never sees)."""
    if not (0.0 <= phi <= 1.0):
        raise ValueError("phi must lie in [0, 1]")
    n = cfg.geometry.n_antennas
    return (1.0 - phi) * cfg.p_tilde_tot * cfg.bob_dist ** (-cfg.alpha) * n


def sinr_eve_uniform(cfg, phi, eve_theta, eve_dist):
    """An eavesdropper's asymptotic SINR under uniform null-space jamming."""
    if not (0.0 <= phi <= 1.0):
        raise ValueError("phi must lie in [0, 1]")
    if eve_dist <= 0:
        raise ValueError("eve_dist must be positive")
    n = cfg.geometry.n_antennas
    s = cfg.k_eb * s_kernel(
        abs(np.sin(eve_theta) - np.sin(cfg.bob_theta)), cfg.geometry)
    path = eve_dist ** (-cfg.alpha)
    num = (1.0 - phi) * cfg.p_tilde_tot * path * n * s
    den = 1.0 + path * phi * cfg.p_tilde_tot * (1.0 - s)
    return num / den


def phi_max(cfg):
    """Largest jamming fraction that keeps Bob at the target rate."""
    n = cfg.geometry.n_antennas
    avail = cfg.p_tilde_tot * cfg.bob_dist ** (-cfg.alpha) * n
    value = 1.0 - (2.0 ** cfg.r_th - 1.0) / avail
    if value <= 0.0:
        raise InfeasibleRateError(
            f"rate {cfg.r_th} infeasible even with all power on the signal",
            deficit=(2.0 ** cfg.r_th - 1.0 - avail) / avail)
    return value


def sor_constants(cfg, phi):
    """(scale, offset, cutoff) of the uniform-jamming boundary at ``phi``."""
    if phi < 0.0:
        raise ValueError("phi must be nonnegative")
    p_jam = phi * cfg.p_tilde_tot
    scale = boundary_scale(cfg, phi) + p_jam
    return SorConstants(scale, p_jam, p_jam / scale)


def _null_sins(cfg):
    """Sine-domain kernel nulls around Bob that fall strictly inside (-1, 1),
    sorted ascending.  Multiples of the full period are main-lobe repeats,
    not nulls, and are excluded."""
    geom = cfg.geometry
    sb = np.sin(cfg.bob_theta)
    width = 1.0 / (geom.n_antennas * geom.spacing)
    k_max = int(np.ceil((1.0 + abs(sb)) / width)) + 1
    ks = np.arange(-k_max, k_max + 1)
    ks = ks[(ks != 0) & (ks % geom.n_antennas != 0)]
    sins = sb + ks * width
    return np.sort(sins[(sins > -1.0 + 1e-12) & (sins < 1.0 - 1e-12)])


def _default_arcs(cfg):
    """Default boundary grid: each lobe arc between consecutive nulls gets an
    odd uniform-in-theta point count, arcs sharing endpoint nulls."""
    sb = np.sin(cfg.bob_theta)
    bounds = np.concatenate(([-1.0], _null_sins(cfg), [1.0]))
    theta_bounds = np.arcsin(bounds)
    main = int(np.searchsorted(bounds, sb)) - 1
    thetas = []
    arcs = []
    for j in range(len(bounds) - 1):
        seg = np.linspace(theta_bounds[j], theta_bounds[j + 1], _ARC_POINTS)
        lo = len(thetas) - (1 if j > 0 else 0)
        thetas.extend(seg if j == 0 else seg[1:])
        arcs.append(LobeArc(index=abs(j - main),
                            support=(theta_bounds[j], theta_bounds[j + 1]),
                            max_radius=0.0, lo=lo, hi=len(thetas) - 1))
    return np.asarray(thetas), arcs


def _arcs_for_grid(cfg, thetas):
    """Assign a user-supplied (sorted) grid to the analytic lobe arcs."""
    thetas = np.asarray(thetas, dtype=float)
    if thetas.ndim != 1 or thetas.size < 2:
        raise ValueError("theta_grid must be a 1-D array with >= 2 points")
    if np.any(np.diff(thetas) <= 0):
        raise ValueError("theta_grid must be strictly increasing")
    sb = np.sin(cfg.bob_theta)
    bounds = np.concatenate(([-1.0], _null_sins(cfg), [1.0]))
    theta_bounds = np.arcsin(bounds)
    main = int(np.searchsorted(bounds, sb)) - 1
    arcs = []
    for j in range(len(bounds) - 1):
        # a grid point sitting exactly on a null belongs to both arcs, like
        # the shared endpoints of the default grid
        lo = int(np.searchsorted(thetas, theta_bounds[j], side="left"))
        hi = int(np.searchsorted(thetas, theta_bounds[j + 1], side="right")) - 1
        arcs.append(LobeArc(index=abs(j - main),
                            support=(theta_bounds[j], theta_bounds[j + 1]),
                            max_radius=0.0, lo=lo, hi=hi))
    return thetas, arcs


def _finish_boundary(cfg, thetas, arcs, radii):
    radii = np.asarray(radii, dtype=float)
    for arc in arcs:
        if arc.hi >= arc.lo >= 0:
            arc.max_radius = float(np.max(radii[arc.lo:arc.hi + 1]))
    return SorBoundary(thetas=thetas, radii=radii, lobes=arcs)


def _eval_uniform_radii(cfg, cons, thetas):
    s_vals = cfg.k_eb * s_kernel(
        np.abs(np.sin(thetas) - np.sin(cfg.bob_theta)), cfg.geometry)
    gap = np.clip(cons.scale * s_vals - cons.offset, 0.0, None)
    radii = gap ** (1.0 / cfg.alpha)
    return np.where(np.abs(thetas) <= _HALF_PI, radii, 0.0)


def sor_boundary_uniform(cfg, phi, theta_grid=None):
    """SOR boundary under uniform null-space jamming at fraction ``phi``."""
    cons = sor_constants(cfg, phi)
    if theta_grid is None:
        thetas, arcs = _default_arcs(cfg)
    else:
        thetas, arcs = _arcs_for_grid(cfg, theta_grid)
    return _finish_boundary(cfg, thetas, arcs, _eval_uniform_radii(cfg, cons, thetas))


def sor_boundary_nojam(cfg, theta_grid=None):
    """SOR boundary with every Watt on the signal (no artificial noise)."""
    return sor_boundary_uniform(cfg, 0.0, theta_grid)


def directional_jam_response(cfg, alloc, thetas):
    """Noise power (normalized by the noise floor) that the allocation beams
    deposit toward each angle, in the large-array limit.

    Explicit beams at angle ``a`` couple to direction ``theta`` through
    ``n_antennas * s_kernel(sin theta - sin a)``; the isotropic null-space
    allocation couples through ``1 - s_eb(theta)``.
    """
    thetas = np.asarray(thetas, dtype=float)
    if alloc.basis == "null_space_uniform":
        s_vals = cfg.k_eb * s_kernel(
            np.abs(np.sin(thetas) - np.sin(cfg.bob_theta)), cfg.geometry)
        return alloc.phi * cfg.p_tilde_tot * (1.0 - s_vals)
    jam = np.zeros_like(thetas, dtype=float)
    n = cfg.geometry.n_antennas
    sin_th = np.sin(thetas)
    for power, angle in zip(alloc.beam_powers, alloc.beam_angles):
        if power == 0.0:
            continue
        jam += (power / cfg.n0) * n * s_kernel(sin_th - np.sin(angle), cfg.geometry)
    return jam


def sor_boundary_directional(cfg, alloc, theta_grid=None):
    """SOR boundary when the noise budget drives explicit jamming beams."""
    _check_allocation(cfg, alloc)
    bs = boundary_scale(cfg, alloc.phi)
    if theta_grid is None:
        thetas, arcs = _default_arcs(cfg)
    else:
        thetas, arcs = _arcs_for_grid(cfg, theta_grid)
    s_vals = cfg.k_eb * s_kernel(
        np.abs(np.sin(thetas) - np.sin(cfg.bob_theta)), cfg.geometry)
    gap = np.clip(bs * s_vals - directional_jam_response(cfg, alloc, thetas),
                  0.0, None)
    radii = np.where(np.abs(thetas) <= _HALF_PI, gap ** (1.0 / cfg.alpha), 0.0)
    return _finish_boundary(cfg, thetas, arcs, radii)


def _segment_area(th, r):
    """Integral of r^2/2 over one arc; Simpson on point triples, trapezoid
    for a trailing pair, exact for the uneven spacing a user grid may have."""
    f = 0.5 * r * r
    total = 0.0
    i = 0
    while i + 2 < len(th):
        h0 = th[i + 1] - th[i]
        h1 = th[i + 2] - th[i + 1]
        total += ((h0 + h1) / 6.0) * (
            f[i] * (2.0 - h1 / h0)
            + f[i + 1] * (h0 + h1) ** 2 / (h0 * h1)
            + f[i + 2] * (2.0 - h0 / h1))
        i += 2
    if i + 1 < len(th):
        total += 0.5 * (f[i] + f[i + 1]) * (th[i + 1] - th[i])
    return total


def sor_area(boundary):
    """Area enclosed by a polar boundary, integrated arc by arc.

    Warns (``ResolutionWarning``) when any sampled arc carries fewer grid
    points than the quadrature needs to be trustworthy.
    """
    thetas, radii = boundary.thetas, boundary.radii
    if not boundary.lobes:
        return float(_segment_area(thetas, radii))
    total = 0.0
    for arc in boundary.lobes:
        if arc.hi < arc.lo or arc.lo < 0:
            continue
        n = arc.hi - arc.lo + 1
        if n < _MIN_ARC_POINTS and arc.max_radius > 0:
            warnings.warn(
                f"lobe arc {arc.index} sampled with only {n} points; "
                "area may be inaccurate", ResolutionWarning, stacklevel=2)
        if n >= 2:
            total += _segment_area(thetas[arc.lo:arc.hi + 1],
                                   radii[arc.lo:arc.hi + 1])
    return float(total)


def lobe_radii(cfg, phi):
    """Maximum boundary radius of the main lobe and each representable side
    lobe under uniform jamming (zeros where jamming kills the lobe)."""
    cons = sor_constants(cfg, phi)
    geom = cfg.geometry
    peaks = np.array([1.0] + [peak_value(m, geom)
                              for m in range(1, _max_side_lobe(geom) + 1)])
    gap = np.clip(cons.scale * cfg.k_eb * peaks - cons.offset, 0.0, None)
    return gap ** (1.0 / cfg.alpha)


def delta_theta_max(cfg, phi):
    """Angular reach of the SOR: the largest |theta - bob_theta| at which the
    boundary is still positive.  Without jamming the crosstalk never fully
    dies, so the reach is the whole front half space (returned as pi)."""
    cons = sor_constants(cfg, phi)
    if cons.cutoff <= 0.0:
        return np.pi
    if cfg.k_eb <= cons.cutoff:
        return 0.0
    geom = cfg.geometry
    u = cons.cutoff / cfg.k_eb
    lm = cross_points(u, bob_profile(cfg, n_side_lobes=max(_max_side_lobe(geom), 1)))
    tables = _kernel_tables(geom.n_antennas, geom.spacing)
    period = 1.0 / geom.spacing
    half = 0.5 * period
    brackets = [(0.0, min(lm.cross_points_main, half))]
    for pair in lm.cross_points_side:
        if pair is not None:
            brackets.append((pair[0], min(pair[1], half)))
    sb = np.sin(cfg.bob_theta)
    best = 0.0
    for sign, side_max in ((1.0, 1.0 - sb), (-1.0, 1.0 + sb)):
        if side_max <= 0:
            continue
        offsets = []
        k = 0
        while k * period < side_max + 1e-15:
            for a, b in brackets:
                for lo_i, hi_i in ((k * period + a, k * period + b),
                                   ((k + 1) * period - b, (k + 1) * period - a)):
                    if lo_i < side_max:
                        offsets.append(min(hi_i, side_max))
            k += 1
        if offsets:
            reach = max(offsets)
            edge = np.arcsin(np.clip(sb + sign * reach, -1.0, 1.0))
            best = max(best, abs(edge - cfg.bob_theta))
    return float(best)


def side_lobe_area_bound(cfg, phi, m):
    """Closed-form cap on the area a single side lobe contributes to the SOR
    under uniform jamming (free-space propagation, broadside Bob).

    The expression is a large-array simplification; it can go negative for
    lobes that jamming has extinguished, and for moderate element counts it
    can sit below the exact lobe area.
    """
    if cfg.alpha != 2.0:
        raise ValueError("the side-lobe area bound assumes alpha == 2")
    if cfg.bob_theta != 0.0:
        raise ValueError("the side-lobe area bound assumes bob_theta == 0")
    if m != int(m) or m < 1:
        raise ValueError("m must be a positive lobe index")
    cons = sor_constants(cfg, phi)
    geom = cfg.geometry
    return (cfg.k_eb * cons.scale / (np.pi * m) ** 2 - 2.0 * cons.offset) / (
        4.0 * geom.n_antennas * geom.spacing)
