"""Jamming power optimization.

Uniform null-space jamming has a single knob, the power fraction ``phi``;
closed forms and a dense grid oracle find its optimum.  Directional jamming
instead drives a handful of explicit beams; three allocation strategies are
implemented:

1. pick the uniform optimum ``phi`` and split it equally over the DFT beams
   covering the suspicious angles (``algorithm1_directional``);
2. cyclic per-beam line search minimizing the exact outage area
   (``algorithm2_iterative``);
3. restrict the budget to the two strongest side lobes and sweep the
   (phi, split) plane with a cheap per-lobe surrogate inside
   (``algorithm3_two_lobes``).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .asymptotic import (
    PowerAllocation,
    _area_weights,
    _boundary_scale_vec,
    _default_arcs,
    boundary_scale,
    phi_max,
    sor_area,
    sor_boundary_directional,
    sor_boundary_uniform,
)
from .crosstalk import s_kernel
from .errors import DegenerateArrayError
from .sop import sop_closed_form, sop_intersection, sor_region_overlap

_OBJECTIVES = ("sop", "sor_area", "partial_area")


@dataclass
class AllocationResult:
    """Outcome of an allocation search: the jamming fraction, the concrete
    per-beam powers, the achieved objective, and the search trace
    (step label / objective pairs, format varying per algorithm)."""

    phi_opt: float
    allocation: PowerAllocation
    objective: float
    trace: list = field(default_factory=list)


@dataclass
class DftJammingBasis:
    """Orthonormal DFT beam set for an array geometry.

    ``beam_angles[j]`` is the physical steering angle of column ``j`` (NaN
    for beams whose spatial frequency no physical angle reaches, which can
    happen below half-wavelength spacing).  ``selected`` lists the column
    indices an algorithm chose to drive.
    """

    columns: np.ndarray
    beam_angles: np.ndarray
    selected: np.ndarray


def build_dft_basis(geom):
    """DFT jamming basis with each beam mapped to its steering angle.

    Column ``j`` has entries exp(-2j pi j k / n)/sqrt(n); it steers toward
    sin(theta) = j/(n d) modulo the kernel period 1/d, folded into [-1, 1]
    (choosing the alias closest to broadside when spacing > 1/2 makes two
    folds land inside).
    """
    n, d = geom.n_antennas, geom.spacing
    k = np.arange(n)
    columns = np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)
    angles = np.full(n, np.nan)
    for j in range(n):
        f = j / n
        cands = [(f + shift) / d for shift in range(-3, 3)]
        cands = [c for c in cands if -1.0 <= c <= 1.0]
        if cands:
            angles[j] = np.arcsin(min(cands, key=lambda v: (abs(v), -v)))
    return DftJammingBasis(columns, angles, np.array([], dtype=int))


def _jam_beam_indices(cfg, basis):
    """Beams eligible to carry noise: physically mappable and outside Bob's
    main lobe (one null-to-null width around the data beam)."""
    geom = cfg.geometry
    width = 1.0 / (geom.n_antennas * geom.spacing)
    with np.errstate(invalid="ignore"):
        main = np.abs(np.sin(basis.beam_angles) - np.sin(cfg.bob_theta)) < width
    return np.where(~np.isnan(basis.beam_angles) & ~main)[0]


def _uniform_objective(cfg, region, objective):
    if objective == "sop":
        if region is not None and region.is_constant:
            return lambda p: sop_closed_form(cfg, p, region)
        return lambda p: sop_intersection(
            sor_boundary_uniform(cfg, p), region, cfg.n_eves)
    if objective == "sor_area":
        return lambda p: sor_area(sor_boundary_uniform(cfg, p))
    if objective == "partial_area":
        return lambda p: sor_region_overlap(sor_boundary_uniform(cfg, p), region)
    raise ValueError(f"objective must be one of {_OBJECTIVES}")


def _golden_min(f, a, b, xtol, trace):
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    best = (c, fc) if fc <= fd else (d, fd)
    trace.extend([(c, fc), (d, fd)])
    while (b - a) > xtol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
            trace.append((c, fc))
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
            trace.append((d, fd))
        cand = (c, fc) if fc <= fd else (d, fd)
        if cand[1] < best[1]:
            best = cand
    return best


def _uniform_allocation(cfg, phi):
    n = cfg.geometry.n_antennas
    return PowerAllocation(
        phi=phi,
        beam_powers=np.full(n - 1, phi * cfg.p_tot / (n - 1)),
        basis="null_space_uniform")


def optimize_phi_uniform(cfg, region, objective="sop", phi_step=1e-3,
                         refine_tol=1e-5):
    """Best uniform jamming fraction for the given objective.

    Dense grid at ``phi_step`` over the feasible range, then golden-section
    refinement around the best cell down to ``refine_tol``; ties go to the
    smaller fraction.
    """
    if objective in ("sop", "partial_area") and region is None:
        raise ValueError(f"objective {objective!r} needs a region")
    limit = phi_max(cfg)
    f = _uniform_objective(cfg, region, objective)
    grid = np.arange(0.0, limit, phi_step)
    vals = np.array([f(p) for p in grid])
    i = int(np.argmin(vals))
    best_phi, best_val = float(grid[i]), float(vals[i])
    trace = [(best_phi, best_val)]
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    if hi > lo:
        g_phi, g_val = _golden_min(f, lo, hi, refine_tol, trace)
        if g_val < best_val:
            best_phi, best_val = float(g_phi), float(g_val)
    return AllocationResult(best_phi, _uniform_allocation(cfg, best_phi),
                            best_val, trace)


def phi_opt_closed_form(cfg, s_eb, d_min):
    """Closed-form optimal uniform jamming fraction against an eavesdropper
    direction with crosstalk ``s_eb``, protecting distances beyond ``d_min``.

    Returns ``(phi, branch)`` where ``branch`` names which expression won:
    ``"phi_g"`` - the stationary point of the outage radius in that
    direction; ``"phi_0"`` - the fraction that already pulls the radius
    inside ``d_min`` (used when it exists and is cheaper).
    """
    if not 0.0 < s_eb:
        raise ValueError("s_eb must be positive")
    if s_eb >= 1.0:
        raise DegenerateArrayError(
            "eavesdropper perfectly aligned with the user (s_eb >= 1): "
            "jamming cannot separate them")
    limit = phi_max(cfg)
    n = cfg.geometry.n_antennas
    gain = 2.0 ** cfg.r_th
    avail = cfg.p_tilde_tot * cfg.bob_dist ** (-cfg.alpha) * n
    phi_g = 1.0 - ((gain - 1.0)
                   + np.sqrt((gain - 1.0) * gain * s_eb * n / (1.0 - s_eb))) / avail
    phi_g = float(np.clip(phi_g, 0.0, limit))
    # the fraction that pins the outage radius at d_min, in the large-array
    # limit where the signal-side factor no longer depends on element count
    phi_0 = (s_eb * gain * cfg.bob_dist ** cfg.alpha - d_min ** cfg.alpha) / (
        (1.0 - s_eb) * cfg.p_tilde_tot)
    # phi_0 is only on the table when the stationary fraction already pulls
    # the outage radius inside d_min; without that check the linearized
    # phi_0 can promise a zero-outage fraction that does not exist near the
    # branch division (off by up to ~0.09 from the dense-grid optimum there)
    reach = s_eb * boundary_scale(cfg, phi_g) \
        - (1.0 - s_eb) * phi_g * cfg.p_tilde_tot
    if reach < d_min ** cfg.alpha and 0.0 <= phi_0 <= 1.0 and phi_0 <= phi_g:
        return float(phi_0), "phi_0"
    return phi_g, "phi_g"


def grid_oracle_phi(cfg, s_eb, d_min, step=1e-4):
    """Dense-grid reference for ``phi_opt_closed_form``: the smallest
    fraction whose outage radius in the ``s_eb`` direction already sits
    inside ``d_min``, else the unconstrained minimizer of that radius."""
    if not 0.0 < s_eb < 1.0:
        raise ValueError("s_eb must lie in (0, 1)")
    limit = phi_max(cfg)
    grid = np.arange(0.0, limit, step)
    radius_a = s_eb * _boundary_scale_vec(cfg, grid) \
        - (1.0 - s_eb) * cfg.p_tilde_tot * grid
    hit = radius_a <= d_min ** cfg.alpha
    if np.any(hit):
        return float(grid[int(np.argmax(hit))])
    return float(grid[int(np.argmin(radius_a))])


class _DirectionalAreaEvaluator:
    """Vectorized outage-area evaluation for directional allocations on the
    default boundary grid, with the per-beam responses precomputed."""

    def __init__(self, cfg, beam_angles):
        self.cfg = cfg
        thetas, arcs = _default_arcs(cfg)
        self.thetas = thetas
        self.arcs = arcs
        self.weights = _area_weights(thetas, arcs)
        geom = cfg.geometry
        sin_th = np.sin(thetas)
        self.s_eb = cfg.k_eb * s_kernel(
            np.abs(sin_th - np.sin(cfg.bob_theta)), geom)
        # response of each beam toward each grid angle, per Watt of drive
        self.response = np.stack([
            (geom.n_antennas / cfg.n0) * s_kernel(sin_th - np.sin(a), geom)
            for a in beam_angles])
        self.inv_alpha2 = 2.0 / cfg.alpha

    def jam(self, powers):
        return powers @ self.response

    def area_from_jam(self, jam, phis):
        """Areas for rows of deposited-noise profiles at signal fractions
        ``phis`` (both batched)."""
        bs = _boundary_scale_vec(self.cfg, phis)
        gap = np.clip(bs[:, None] * self.s_eb[None, :] - jam, 0.0, None)
        return (gap ** self.inv_alpha2) @ self.weights

    def area(self, powers):
        phi = np.sum(powers) / self.cfg.p_tot
        return float(self.area_from_jam(self.jam(powers)[None, :],
                                        np.array([phi]))[0])


def algorithm1_directional(cfg, region):
    """Uniform-optimal ``phi``, then an equal split over the DFT beams that
    cover the suspicious angles (Bob's main-lobe beams excluded).

    Falls back to the uniform allocation, with a warning, when no beam
    covers the region.
    """
    uniform = optimize_phi_uniform(cfg, region, objective="sop")
    phi = uniform.phi_opt
    basis = build_dft_basis(cfg.geometry)
    lo, hi = region.angle_interval
    eligible = _jam_beam_indices(cfg, basis)
    angles = basis.beam_angles[eligible]
    idx = eligible[(angles >= lo) & (angles <= hi)]
    trace = [("uniform", phi, uniform.objective)]
    if idx.size == 0:
        warnings.warn("no DFT beam covers the suspicious region; "
                      "keeping uniform null-space jamming")
        return AllocationResult(phi, uniform.allocation, uniform.objective,
                                trace)
    alloc = PowerAllocation(
        phi=phi,
        beam_powers=np.full(idx.size, phi * cfg.p_tot / idx.size),
        basis="dft_selected",
        beam_angles=basis.beam_angles[idx])
    objective = sop_intersection(
        sor_boundary_directional(cfg, alloc), region, cfg.n_eves)
    trace.append(("directional", phi, objective))
    return AllocationResult(phi, alloc, objective, trace)


def _beam_line_descent(ev, powers, cap, epsilon, n_candidates, max_sweeps):
    """Cyclic per-beam exhaustive line search on the exact-area objective.
    Mutates and returns ``powers``; also returns the final objective, the
    per-visit objective trace, and whether the sweep loop converged."""
    current = ev.area(powers)
    trace = [current]
    converged = False
    for _ in range(max_sweeps):
        previous = powers.copy()
        jam_base = ev.jam(powers)
        for b in range(len(powers)):
            room = cap - (np.sum(powers) - powers[b])
            if room <= 0:
                continue
            cand = np.linspace(0.0, room, n_candidates, endpoint=False)
            cand = np.append(cand, powers[b])
            jam_rows = jam_base[None, :] + np.outer(
                cand - powers[b], ev.response[b])
            phis = (np.sum(powers) - powers[b] + cand) / ev.cfg.p_tot
            vals = ev.area_from_jam(jam_rows, phis)
            j = int(np.argmin(vals))
            if vals[j] < current:
                jam_base = jam_base + (cand[j] - powers[b]) * ev.response[b]
                powers[b] = cand[j]
                current = float(vals[j])
            trace.append(current)
        if np.linalg.norm(powers - previous) < epsilon:
            converged = True
            break
    return powers, current, trace, converged


def algorithm2_iterative(cfg, initial=None, epsilon=None, beams=None,
                         n_candidates=200, max_sweeps=60):
    """Cyclic per-beam line search minimizing the exact outage area.

    Each visit to a beam scans ``n_candidates`` drive levels from zero up to
    (but excluding) the power still compatible with the feasibility limit,
    keeps the current level in the candidate set (so the objective never
    increases), and accepts the best.  Sweeps stop when the allocation moves
    less than ``epsilon`` (default ``1e-6 * p_tot``) in Euclidean norm.

    ``initial`` must respect the feasibility budget and is honored as the
    single starting point.  Without it the descent runs twice - once from
    the noise budget ``phi_max/2 * p_tot`` spread equally over the beams,
    once from the two-strongest-lobes split found by the scan behind
    ``algorithm3_two_lobes`` - and the lower end point wins: the spread
    start alone can stall on a poor vertex of the piecewise-concave
    landscape.  ``beams`` can restrict the search to a subset of DFT basis
    columns.
    """
    limit = phi_max(cfg)
    cap = limit * cfg.p_tot * (1.0 - 1e-9)
    if epsilon is None:
        epsilon = 1e-6 * cfg.p_tot
    if initial is not None:
        if initial.basis == "null_space_uniform":
            raise ValueError("initial allocation must carry explicit beams")
        angles = np.asarray(initial.beam_angles, dtype=float)
        starts = [initial.beam_powers.astype(float).copy()]
        if np.sum(starts[0]) > limit * cfg.p_tot * (1.0 + 1e-9):
            raise ValueError(
                "initial beam powers exceed the feasibility budget "
                f"phi_max * p_tot = {limit * cfg.p_tot:.6g} W")
    else:
        basis = build_dft_basis(cfg.geometry)
        idx = _jam_beam_indices(cfg, basis) if beams is None \
            else np.asarray(beams, dtype=int)
        if idx.size == 0:
            raise DegenerateArrayError("no eligible jamming beams")
        angles = basis.beam_angles[idx]
        starts = [np.full(idx.size, 0.5 * limit * cfg.p_tot / idx.size)]
        try:
            cols, _, _, two_powers, _, _ = _two_lobe_scan(cfg)
        except DegenerateArrayError:
            cols = None
        if cols is not None and np.all(np.isin(cols, idx)):
            seed = np.zeros(idx.size)
            for col, p in zip(cols, two_powers):
                seed[int(np.nonzero(idx == col)[0][0])] = p
            if np.sum(seed) <= cap:
                starts.append(seed)
    ev = _DirectionalAreaEvaluator(cfg, angles)
    best = None
    for start in starts:
        result = _beam_line_descent(ev, start, cap, epsilon,
                                    n_candidates, max_sweeps)
        if best is None or result[1] < best[1]:
            best = result
    powers, current, trace, converged = best
    if not converged:
        warnings.warn("beam power iteration hit the sweep limit before "
                      f"moving less than epsilon={epsilon:.3g}")
    phi = float(np.sum(powers) / cfg.p_tot)
    alloc = PowerAllocation(phi, powers, "custom" if initial is not None and
                            initial.basis == "custom" else "dft_selected",
                            angles)
    return AllocationResult(phi, alloc, current, trace)


def lobe_notch_objective(cfg, phi, lobe_angles, beam_powers):
    """Idealized per-lobe area score: sum over lobes of
    ((a_m - p_m/n0)^+)^(2/alpha), where ``a_m`` is the unjammed
    radius**alpha at the lobe angle and each lobe's dedicated beam is
    assumed to deposit exactly its normalized power there and nothing
    elsewhere.  Concave in the powers, so its minimum over a power budget
    sits on the boundary of the feasible set - the structural fact behind
    the two-lobe restriction of ``algorithm3_two_lobes``."""
    bs = boundary_scale(cfg, phi)
    geom = cfg.geometry
    a = bs * cfg.k_eb * s_kernel(
        np.abs(np.sin(np.asarray(lobe_angles)) - np.sin(cfg.bob_theta)), geom)
    notch = np.asarray(beam_powers) / cfg.n0
    return float(np.sum(np.clip(a - notch, 0.0, None) ** (2.0 / cfg.alpha)))


def _side_lobe_peak_angles(cfg, by_peak=True):
    """Angles of the side-lobe maxima of the no-jamming boundary, strongest
    arcs first; ``by_peak=False`` uses arc midpoints instead."""
    thetas, arcs = _default_arcs(cfg)
    geom = cfg.geometry
    s_vals = cfg.k_eb * s_kernel(
        np.abs(np.sin(thetas) - np.sin(cfg.bob_theta)), geom)
    out = []
    for arc in arcs:
        if arc.index == 0 or arc.hi <= arc.lo:
            continue
        if by_peak:
            k = arc.lo + int(np.argmax(s_vals[arc.lo:arc.hi + 1]))
            angle, strength = thetas[k], s_vals[k]
        else:
            angle = 0.5 * (arc.support[0] + arc.support[1])
            strength = cfg.k_eb * s_kernel(
                abs(np.sin(angle) - np.sin(cfg.bob_theta)), geom)
        out.append((strength, arc.index, angle))
    out.sort(key=lambda t: (-t[0], t[1], t[2]))
    return out


def _two_lobe_scan(cfg, by_peak=True, phi_step=1e-2, n_splits=201):
    """Exhaustive (phi, split) scan with the whole noise budget on the two
    DFT beams that deposit most strongly on the two strongest side lobes.
    Returns (beam_columns, beam_angles, phi, split_powers, area, trace)."""
    ranked = _side_lobe_peak_angles(cfg, by_peak)
    if len(ranked) < 2:
        raise DegenerateArrayError(
            "need at least two side lobes to aim at; the array resolves "
            f"only {len(ranked)}")
    basis = build_dft_basis(cfg.geometry)
    eligible = _jam_beam_indices(cfg, basis)
    if eligible.size < 2:
        raise DegenerateArrayError(
            f"only {eligible.size} jamming beams clear the main lobe")
    geom = cfg.geometry
    cols = []
    for _, _, lobe_angle in ranked[:2]:
        free = np.setdiff1d(eligible, np.asarray(cols, dtype=int))
        deposit = s_kernel(np.abs(np.sin(basis.beam_angles[free])
                                  - np.sin(lobe_angle)), geom)
        cols.append(int(free[int(np.argmax(deposit))]))
    cols = np.asarray(cols, dtype=int)
    angles = basis.beam_angles[cols]
    ev = _DirectionalAreaEvaluator(cfg, angles)
    limit = phi_max(cfg)
    splits = np.linspace(0.0, 1.0, n_splits)
    shares = np.column_stack([splits, 1.0 - splits])
    best = None
    trace = []
    for phi in np.arange(0.0, limit, phi_step):
        budget = phi * cfg.p_tot
        areas = ev.area_from_jam((shares * budget) @ ev.response,
                                 np.full(len(splits), phi))
        k = int(np.argmin(areas))
        area = float(areas[k])
        trace.append((float(phi), float(splits[k]), area))
        if best is None or area < best[0]:
            best = (area, float(phi), shares[k] * budget)
    area, phi, powers = best
    return cols, angles, phi, powers, area, trace


def algorithm3_two_lobes(cfg, by_peak=True, phi_step=1e-2, n_splits=201):
    """Put the whole noise budget on the two DFT beams nearest the two
    strongest side lobes and search the jamming fraction and the two-way
    split exhaustively, scoring by the exact outage area.

    The per-lobe score of ``lobe_notch_objective`` is concave in the beam
    powers, so budget-constrained minimizers concentrate power on few
    lobes; restricting to the two strongest keeps the search
    two-dimensional.  ``by_peak`` selects whether lobe direction means the
    lobe maximum (default) or the arc midpoint.
    """
    _, angles, phi, powers, area, trace = _two_lobe_scan(
        cfg, by_peak, phi_step, n_splits)
    alloc = PowerAllocation(phi, powers, "dft_selected", angles)
    return AllocationResult(phi, alloc, area, trace)


def sector_area_bound(boundary):
    """Sector overestimate of the outage area: each lobe arc is bounded by a
    circular sector of the average arc width at the arc's peak radius."""
    arcs = [a for a in boundary.lobes if a.lo >= 0]
    if not arcs:
        raise ValueError("boundary carries no lobe arcs")
    return float(np.pi / (2.0 * len(arcs))
                 * np.sum([a.max_radius ** 2 for a in arcs]))
