"""Command-line front end: manifest ingestion, figure-style sweeps, SOR maps,
and deterministic CSV emission.

Manifests are JSON.  Angles enter in degrees through keys carrying a ``_deg``
suffix; distances are meters, powers Watts.  Output is CSV with floats at 9
significant digits, NaN spelled ``nan``, and a trailing ``warning`` column;
runs with the same manifest and seed are byte-identical.
"""

import argparse
import json
import math
import os
import sys
import time
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .alloc import (
    algorithm1_directional,
    algorithm2_iterative,
    algorithm3_two_lobes,
    build_dft_basis,
    _jam_beam_indices,
    grid_oracle_phi,
    optimize_phi_uniform,
    phi_opt_closed_form,
)
from .asymptotic import (
    PowerAllocation,
    ScenarioConfig,
    lobe_radii,
    phi_max,
    sor_area,
    sor_boundary_directional,
    sor_boundary_nojam,
    sor_boundary_uniform,
)
from .crosstalk import ArrayGeometry
from .errors import DegenerateArrayError, InfeasibleRateError
from .mc_oracle import McRunSpec, empirical_sop
from .sop import SuspiciousRegion, sop_closed_form, sop_intersection

_SCHEMES = ("no_jam", "uniform", "algo1", "algo2", "algo3")
_SWEEPABLE = ("phi", "bob_dist_m", "bob_theta_deg", "r_th", "n_antennas",
              "alpha", "k_eb", "p_tot_w", "n0_w", "n_eves")
_ROW_ERRORS = (InfeasibleRateError, DegenerateArrayError, ValueError)


class ManifestError(ValueError):
    """Validation failure at a specific manifest field."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


_MISSING = object()


def _field(block, key, prefix, default=_MISSING):
    if key in block:
        return block[key]
    if default is _MISSING:
        raise ManifestError(f"{prefix}.{key}", "missing required field")
    return default


def _number(block, key, prefix, default=_MISSING, integer=False,
            minimum=None):
    raw = _field(block, key, prefix, default)
    if raw is None and default is None:
        return None
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ManifestError(f"{prefix}.{key}", f"expected a number, got {raw!r}")
    if integer and int(raw) != raw:
        raise ManifestError(f"{prefix}.{key}", f"expected an integer, got {raw!r}")
    val = int(raw) if integer else float(raw)
    if minimum is not None and val < minimum:
        raise ManifestError(f"{prefix}.{key}", f"must be >= {minimum}, got {val}")
    return val


def _reject_unknown(block, allowed, prefix):
    unknown = sorted(set(block) - set(allowed))
    if unknown:
        raise ManifestError(f"{prefix}.{unknown[0]}", "unknown field")


def _parse_scenario(manifest):
    block = manifest.get("scenario")
    if not isinstance(block, dict):
        raise ManifestError("scenario", "missing or not an object")
    _reject_unknown(block, ("n_antennas", "spacing", "alpha", "p_tot_w",
                            "n0_w", "r_th", "bob_theta_deg", "bob_dist_m",
                            "k_eb", "n_eves"), "scenario")
    n = _number(block, "n_antennas", "scenario", integer=True, minimum=2)
    spacing = _number(block, "spacing", "scenario", default=0.5)
    alpha = _number(block, "alpha", "scenario", default=3.0)
    p_tot = _number(block, "p_tot_w", "scenario", default=1.0)
    n0 = _number(block, "n0_w", "scenario", default=1e-8)
    r_th = _number(block, "r_th", "scenario")
    theta = _number(block, "bob_theta_deg", "scenario", default=0.0)
    dist = _number(block, "bob_dist_m", "scenario")
    k_eb = _number(block, "k_eb", "scenario", default=1.0)
    n_eves = _number(block, "n_eves", "scenario", default=1, integer=True,
                     minimum=1)
    try:
        return ScenarioConfig(geometry=ArrayGeometry(n, spacing), alpha=alpha,
                              p_tot=p_tot, n0=n0, r_th=r_th,
                              bob_theta=math.radians(theta), bob_dist=dist,
                              k_eb=k_eb, n_eves=n_eves)
    except ValueError as exc:
        raise ManifestError("scenario", str(exc)) from exc


def _parse_region(manifest):
    block = manifest.get("region")
    if block is None:
        return None
    if not isinstance(block, dict):
        raise ManifestError("region", "not an object")
    _reject_unknown(block, ("angles_deg", "d_min_m", "d_max_m"), "region")
    angles = _field(block, "angles_deg", "region")
    if (not isinstance(angles, list) or len(angles) != 2
            or not all(isinstance(a, (int, float)) and not isinstance(a, bool)
                       for a in angles)):
        raise ManifestError("region.angles_deg",
                            f"expected [lo, hi] in degrees, got {angles!r}")
    d_min = _number(block, "d_min_m", "region", minimum=0.0)
    d_max = _number(block, "d_max_m", "region")
    try:
        return SuspiciousRegion((math.radians(angles[0]),
                                 math.radians(angles[1])), d_min, d_max)
    except ValueError as exc:
        raise ManifestError("region", str(exc)) from exc


def _parse_sweep(manifest):
    block = manifest.get("sweep")
    if not isinstance(block, dict):
        raise ManifestError("sweep", "missing or not an object")
    _reject_unknown(block, ("parameter", "grid"), "sweep")
    parameter = _field(block, "parameter", "sweep")
    if parameter not in _SWEEPABLE:
        raise ManifestError("sweep.parameter",
                            f"unknown parameter {parameter!r}; "
                            f"one of {', '.join(_SWEEPABLE)}")
    grid = _field(block, "grid", "sweep")
    if isinstance(grid, dict):
        _reject_unknown(grid, ("start", "stop", "step"), "sweep.grid")
        start = _number(grid, "start", "sweep.grid")
        stop = _number(grid, "stop", "sweep.grid")
        step = _number(grid, "step", "sweep.grid")
        if step <= 0:
            raise ManifestError("sweep.grid.step", "must be positive")
        values = np.arange(start, stop + 0.5 * step, step)
    elif isinstance(grid, list):
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                   for v in grid):
            raise ManifestError("sweep.grid", "grid entries must be numbers")
        values = np.asarray(grid, dtype=float)
    else:
        raise ManifestError("sweep.grid",
                            "expected a list or {start, stop, step}")
    if values.size == 0:
        raise ManifestError("sweep.grid", "empty sweep grid")
    return parameter, values


def _parse_scheme(manifest):
    block = manifest.get("scheme")
    if isinstance(block, str):
        block = {"kind": block}
    if not isinstance(block, dict):
        raise ManifestError("scheme", "missing or not an object")
    _reject_unknown(block, ("kind", "phi", "objective"), "scheme")
    kind = _field(block, "kind", "scheme")
    if kind not in _SCHEMES:
        raise ManifestError("scheme.kind",
                            f"unknown scheme {kind!r}; one of "
                            f"{', '.join(_SCHEMES)}")
    phi = _number(block, "phi", "scheme", default=None)
    if phi is not None:
        if kind != "uniform":
            raise ManifestError("scheme.phi",
                                "fixed phi is only valid for the uniform "
                                "scheme")
        if not 0.0 <= phi <= 1.0:
            raise ManifestError("scheme.phi", f"must lie in [0, 1], got {phi}")
    objective = _field(block, "objective", "scheme", default=None)
    if objective is not None and objective not in ("sop", "sor_area"):
        raise ManifestError("scheme.objective",
                            f"expected 'sop' or 'sor_area', got {objective!r}")
    return kind, phi, objective


def _parse_mc(manifest):
    block = manifest.get("mc")
    if block is None:
        return None
    if not isinstance(block, dict):
        raise ManifestError("mc", "not an object")
    _reject_unknown(block, ("n_samples", "master_seed", "rician_k",
                            "threads"), "mc")
    return {
        "n_samples": _number(block, "n_samples", "mc", integer=True,
                             minimum=1),
        "master_seed": _number(block, "master_seed", "mc", default=0,
                               integer=True, minimum=0),
        "rician_k": _number(block, "rician_k", "mc", default=None,
                            minimum=0.0),
        "threads": _number(block, "threads", "mc", default=None, integer=True,
                           minimum=1),
    }


@dataclass
class ExperimentManifest:
    scenario: ScenarioConfig
    region: object
    sweep: object
    scheme: object
    mc: object
    output_path: object


def load_manifest(path, need_sweep=True, need_region=False, need_mc=False):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ManifestError("manifest", f"cannot read {path}: {exc}") from exc
    try:
        manifest = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError("manifest", f"invalid JSON: {exc}") from exc
    if not isinstance(manifest, dict):
        raise ManifestError("manifest", "top level must be an object")
    _reject_unknown(manifest, ("scenario", "region", "sweep", "scheme", "mc",
                               "output_path"), "manifest")
    scenario = _parse_scenario(manifest)
    region = _parse_region(manifest)
    scheme = _parse_scheme(manifest)
    sweep = _parse_sweep(manifest) if need_sweep or "sweep" in manifest \
        else None
    mc = _parse_mc(manifest)
    output_path = manifest.get("output_path")
    if output_path is not None and not isinstance(output_path, str):
        raise ManifestError("output_path", "must be a string")
    if need_region and region is None:
        raise ManifestError("region", "missing (required for this command)")
    if scheme[0] == "algo1" and region is None:
        raise ManifestError("region", "missing (required for scheme algo1)")
    if need_mc and mc is None:
        raise ManifestError("mc", "missing (required for mc-validate)")
    if sweep is not None and sweep[0] == "phi" \
            and scheme[0] not in ("uniform", "algo1"):
        raise ManifestError("sweep.parameter",
                            "a phi sweep needs scheme uniform or algo1 "
                            "(the other schemes choose phi themselves)")
    return ExperimentManifest(scenario, region, sweep, scheme, mc,
                              output_path)


def _apply_sweep(cfg, parameter, value):
    """New config (and a phi override for parameter 'phi') at a grid value."""
    if parameter == "phi":
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"phi grid value {value} outside [0, 1]")
        return cfg, float(value)
    if parameter == "n_antennas":
        if int(value) != value:
            raise ValueError(f"n_antennas grid value {value} is not integer")
        geometry = ArrayGeometry(int(value), cfg.geometry.spacing)
        return replace(cfg, geometry=geometry), None
    if parameter == "n_eves":
        if int(value) != value:
            raise ValueError(f"n_eves grid value {value} is not integer")
        return replace(cfg, n_eves=int(value)), None
    if parameter == "bob_theta_deg":
        return replace(cfg, bob_theta=math.radians(value)), None
    field_map = {"bob_dist_m": "bob_dist", "r_th": "r_th", "alpha": "alpha",
                 "k_eb": "k_eb", "p_tot_w": "p_tot", "n0_w": "n0"}
    return replace(cfg, **{field_map[parameter]: float(value)}), None


# ---------------------------------------------------------------------------
# CSV emission

def _fmt(value):
    if isinstance(value, str):
        return value
    value = float(value)
    return "nan" if math.isnan(value) else f"{value:.9g}"


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


class _RowGuard:
    """Collects warnings and row-level failures into the warning column."""

    def __init__(self):
        self.notes = []

    def run(self, fn, n_values):
        """fn() -> tuple of metrics; on failure the row turns into NaNs."""
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            try:
                values = fn()
            except _ROW_ERRORS as exc:
                values = (math.nan,) * n_values
                caught = list(caught)
                caught.append(exc)
        note = "; ".join(
            str(getattr(c, "message", c)) for c in caught).replace(",", ";")
        if note:
            self.notes.append(note)
        return tuple(values) + (note,)


# ---------------------------------------------------------------------------
# Scheme evaluation shared by the manifest-driven subcommands

def _region_beam_angles(cfg, region):
    """Angles of the eligible DFT beams inside the suspicious sector."""
    basis = build_dft_basis(cfg.geometry)
    eligible = _jam_beam_indices(cfg, basis)
    angles = basis.beam_angles[eligible]
    lo, hi = region.angle_interval
    return angles[(angles >= lo) & (angles <= hi)]


def _sop_fixed_phi_directional(cfg, region, phi):
    """SOP with the noise budget split equally over the in-region beams."""
    if phi >= phi_max(cfg):
        return 1.0
    beam_angles = _region_beam_angles(cfg, region)
    if beam_angles.size == 0:
        warnings.warn("no DFT beam covers the suspicious region; "
                      "falling back to uniform jamming")
        return sop_closed_form(cfg, phi, region)
    alloc = PowerAllocation(
        phi=phi,
        beam_powers=np.full(beam_angles.size,
                            phi * cfg.p_tot / beam_angles.size),
        basis="dft_selected", beam_angles=beam_angles)
    return sop_intersection(sor_boundary_directional(cfg, alloc), region,
                            cfg.n_eves)


def _scheme_sop(cfg, region, kind, fixed_phi, phi_step):
    """(phi used, sop, allocation or None) for one scheme evaluation."""
    if kind == "no_jam":
        return 0.0, sop_closed_form(cfg, 0.0, region), None
    if kind == "uniform":
        if fixed_phi is not None:
            return fixed_phi, sop_closed_form(cfg, fixed_phi, region), None
        res = optimize_phi_uniform(cfg, region, objective="sop",
                                   phi_step=phi_step)
        return res.phi_opt, res.objective, None
    if kind == "algo1":
        if fixed_phi is not None:
            return (fixed_phi,
                    _sop_fixed_phi_directional(cfg, region, fixed_phi), None)
        res = algorithm1_directional(cfg, region)
        return res.phi_opt, res.objective, res.allocation
    res = algorithm2_iterative(cfg) if kind == "algo2" \
        else algorithm3_two_lobes(cfg)
    sop = sop_intersection(sor_boundary_directional(cfg, res.allocation),
                           region, cfg.n_eves)
    return res.phi_opt, sop, res.allocation


def _scheme_optimum(cfg, region, kind, objective, phi_step):
    """(phi_opt, objective value) for the optimize subcommand."""
    if objective is None:
        objective = "sop" if region is not None else "sor_area"
    if objective == "sop" and region is None:
        raise ManifestError("region", "missing (required for objective sop)")
    if kind == "no_jam":
        value = sop_closed_form(cfg, 0.0, region) if objective == "sop" \
            else sor_area(sor_boundary_nojam(cfg))
        return 0.0, value
    if kind == "uniform":
        res = optimize_phi_uniform(cfg, region, objective=objective,
                                   phi_step=phi_step)
        return res.phi_opt, res.objective
    if kind == "algo1":
        res = algorithm1_directional(cfg, region)
        return res.phi_opt, res.objective
    res = algorithm2_iterative(cfg) if kind == "algo2" \
        else algorithm3_two_lobes(cfg)
    if objective == "sop":
        value = sop_intersection(sor_boundary_directional(cfg,
                                                          res.allocation),
                                 region, cfg.n_eves)
    else:
        value = res.objective
    return res.phi_opt, value


def _scheme_boundary(cfg, region, kind, fixed_phi, theta_grid):
    if kind == "no_jam":
        return sor_boundary_nojam(cfg, theta_grid)
    if kind == "uniform":
        if fixed_phi is None:
            raise ManifestError("scheme.phi",
                                "required for sor-map with scheme uniform")
        return sor_boundary_uniform(cfg, fixed_phi, theta_grid)
    if kind == "algo1":
        res = algorithm1_directional(cfg, region)
    else:
        res = algorithm2_iterative(cfg) if kind == "algo2" \
            else algorithm3_two_lobes(cfg)
    return sor_boundary_directional(cfg, res.allocation, theta_grid)


# ---------------------------------------------------------------------------
# Figure-style sweeps with the reference constants: d_0=0.5, alpha=3,
# P_tot=1 W, N_0=1e-8 W, pure-LOS crosstalk, theta_b=0.

def _reference_cfg(n_antennas, r_th, bob_dist, alpha=3.0, n_eves=1):
    return ScenarioConfig(geometry=ArrayGeometry(n_antennas, 0.5),
                          alpha=alpha, p_tot=1.0, n0=1e-8, r_th=r_th,
                          bob_theta=0.0, bob_dist=bob_dist, n_eves=n_eves)


def _fig2(out, phi_step, both_alpha):
    guard = _RowGuard()
    rows = []
    alphas = (3.0, 2.0) if both_alpha else (3.0,)
    for alpha in alphas:
        cfg = _reference_cfg(100, 10.0, 100.0, alpha=alpha)
        for phi in np.arange(0.0, phi_max(cfg), phi_step):
            def metrics(cfg=cfg, phi=phi):
                radii = lobe_radii(cfg, phi)[:7]
                if radii.size < 7:
                    radii = np.pad(radii, (0, 7 - radii.size),
                                   constant_values=math.nan)
                return tuple(radii)
            rows.append((alpha, phi) + guard.run(metrics, 7))
    header = ["alpha", "phi"] + [f"lobe{m}_m" for m in range(7)] + ["warning"]
    _write_csv(out, header, rows)
    return len(rows), len(guard.notes)


def _fig3(out, phi_step):
    region = SuspiciousRegion((math.radians(-15.0), math.radians(15.0)),
                              50.0, 100.0)
    cfg100 = _reference_cfg(100, 10.0, 100.0, n_eves=10)
    cfg50 = _reference_cfg(50, 10.0, 100.0, n_eves=10)
    guard = _RowGuard()
    rows = []
    for phi in np.arange(0.0, 1.0 + 0.5 * phi_step, phi_step):
        phi = min(float(phi), 1.0)

        def metrics(phi=phi):
            return (sop_closed_form(cfg100, phi, region),
                    _sop_fixed_phi_directional(cfg100, region, phi),
                    sop_closed_form(cfg50, phi, region))
        rows.append((phi,) + guard.run(metrics, 3))
    header = ["phi", "sop_uniform_nt100", "sop_directional_nt100",
              "sop_uniform_nt50", "warning"]
    _write_csv(out, header, rows)
    return len(rows), len(guard.notes)


def _fig4(out, n_points):
    configs = [("nt50_db100", _reference_cfg(50, 5.0, 100.0)),
               ("nt100_db100", _reference_cfg(100, 5.0, 100.0)),
               ("nt100_db150", _reference_cfg(100, 5.0, 150.0))]
    d_min = 50.0
    guard = _RowGuard()
    rows = []
    for s_eb in np.linspace(0.05, 0.95, n_points):
        def metrics(s_eb=s_eb):
            out_vals = []
            for _, cfg in configs:
                out_vals.append(phi_opt_closed_form(cfg, s_eb, d_min)[0])
                out_vals.append(grid_oracle_phi(cfg, s_eb, d_min))
            return tuple(out_vals)
        rows.append((s_eb,) + guard.run(metrics, 6))
    header = ["s_eb"]
    for name, _ in configs:
        header += [f"phi_closed_{name}", f"phi_oracle_{name}"]
    header.append("warning")
    _write_csv(out, header, rows)
    return len(rows), len(guard.notes)


def _fig5(out):
    guard = _RowGuard()
    rows = []
    for bob_dist in np.arange(60.0, 160.0 + 5.0, 10.0):
        cfg = _reference_cfg(50, 5.0, float(bob_dist))

        def metrics(cfg=cfg):
            no_jam = sor_area(sor_boundary_nojam(cfg))
            uniform = optimize_phi_uniform(cfg, None,
                                           objective="sor_area").objective
            algo2 = algorithm2_iterative(cfg).objective
            algo3 = algorithm3_two_lobes(cfg).objective
            return no_jam, uniform, algo2, algo3
        rows.append((bob_dist,) + guard.run(metrics, 4))
    header = ["bob_dist_m", "area_no_jam_m2", "area_uniform_m2",
              "area_algo2_m2", "area_algo3_m2", "warning"]
    _write_csv(out, header, rows)
    return len(rows), len(guard.notes)


def _fig6(out):
    region = SuspiciousRegion((math.radians(-30.0), math.radians(30.0)),
                              50.0, 200.0)
    guard = _RowGuard()
    rows = []
    for bob_dist in np.arange(60.0, 160.0 + 5.0, 10.0):
        cfg = _reference_cfg(100, 10.0, float(bob_dist), n_eves=10)

        def metrics(cfg=cfg):
            no_jam = sop_closed_form(cfg, 0.0, region)
            uniform = optimize_phi_uniform(cfg, region,
                                           objective="sop").objective
            algo1 = algorithm1_directional(cfg, region).objective
            alloc3 = algorithm3_two_lobes(cfg).allocation
            algo3 = sop_intersection(sor_boundary_directional(cfg, alloc3),
                                     region, cfg.n_eves)
            return no_jam, uniform, algo1, algo3
        rows.append((bob_dist,) + guard.run(metrics, 4))
    header = ["bob_dist_m", "sop_no_jam", "sop_uniform", "sop_algo1",
              "sop_algo3", "warning"]
    _write_csv(out, header, rows)
    return len(rows), len(guard.notes)


# ---------------------------------------------------------------------------
# Manifest-driven subcommands

def _run_sop(manifest, phi_step):
    parameter, values = manifest.sweep
    kind, scheme_phi, _ = manifest.scheme
    guard = _RowGuard()
    rows = []
    for value in values:
        def metrics(value=value):
            cfg, phi_override = _apply_sweep(manifest.scenario, parameter,
                                             value)
            phi = phi_override if phi_override is not None else scheme_phi
            used, sop, _ = _scheme_sop(cfg, manifest.region, kind, phi,
                                       phi_step)
            return used, sop
        rows.append((value,) + guard.run(metrics, 2))
    header = [parameter, "phi_used", "sop", "warning"]
    return header, rows, guard


def _run_optimize(manifest, phi_step):
    parameter, values = manifest.sweep
    if parameter == "phi":
        raise ManifestError("sweep.parameter",
                            "optimize chooses phi; sweep a scenario "
                            "parameter instead")
    kind, _, objective = manifest.scheme
    guard = _RowGuard()
    rows = []
    for value in values:
        def metrics(value=value):
            cfg, _ = _apply_sweep(manifest.scenario, parameter, value)
            return _scheme_optimum(cfg, manifest.region, kind, objective,
                                   phi_step)
        rows.append((value,) + guard.run(metrics, 2))
    header = [parameter, "phi_opt", "objective", "warning"]
    return header, rows, guard


def _run_mc_validate(manifest, phi_step, seed, threads):
    parameter, values = manifest.sweep
    kind, scheme_phi, _ = manifest.scheme
    mc = manifest.mc
    master_seed = mc["master_seed"] if seed is None else seed
    guard = _RowGuard()
    rows = []
    for value in values:
        def metrics(value=value):
            cfg, phi_override = _apply_sweep(manifest.scenario, parameter,
                                             value)
            phi = phi_override if phi_override is not None else scheme_phi
            used, closed, alloc = _scheme_sop(cfg, manifest.region, kind,
                                              phi, phi_step)
            spec = McRunSpec(n_samples=mc["n_samples"],
                             master_seed=master_seed,
                             rician_k=mc["rician_k"], threads=threads)
            empirical = empirical_sop(cfg, alloc if alloc is not None
                                      else used, manifest.region, spec)
            se = math.sqrt(max(empirical * (1.0 - empirical), 1e-12)
                           / mc["n_samples"])
            return used, closed, empirical, se
        rows.append((value,) + guard.run(metrics, 4))
    header = [parameter, "phi_used", "sop_closed", "sop_mc", "binom_se",
              "warning"]
    return header, rows, guard


def _run_sor_map(manifest, n_points):
    kind, scheme_phi, _ = manifest.scheme
    thetas = np.linspace(-0.5 * math.pi, 0.5 * math.pi, n_points)
    guard = _RowGuard()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            boundary = _scheme_boundary(manifest.scenario, manifest.region,
                                        kind, scheme_phi, thetas)
            radii = boundary.radii
        except _ROW_ERRORS as exc:
            radii = np.full(thetas.size, math.nan)
            caught = list(caught)
            caught.append(exc)
    note = "; ".join(
        str(getattr(c, "message", c)) for c in caught).replace(",", ";")
    if note:
        guard.notes.append(note)
    rows = [(math.degrees(th), r, note) for th, r in zip(thetas, radii)]
    header = ["theta_deg", "radius_m", "warning"]
    return header, rows, guard


# ---------------------------------------------------------------------------
# Entry point

def _resolve_threads(cli_threads, mc):
    if cli_threads is not None:
        return cli_threads
    if mc is not None and mc.get("threads"):
        return mc["threads"]
    env = os.environ.get("SECRECY_SOR_THREADS")
    if env:
        try:
            value = int(env)
            if value < 1:
                raise ValueError
        except ValueError:
            raise ManifestError("SECRECY_SOR_THREADS",
                                f"expected a positive integer, got {env!r}")
        return value
    return 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="secrecy-sor",
        description="Secrecy outage regions and probabilities for a massive "
                    "MIMO transmitter with artificial-noise jamming.")
    sub = parser.add_subparsers(dest="command", required=True)

    rep = sub.add_parser("reproduce",
                         help="rebuild one of the reference figure sweeps")
    rep.add_argument("figure",
                     choices=["fig2", "fig3", "fig4", "fig5", "fig6"])
    rep.add_argument("--out", help="output CSV path (default <figure>.csv)")
    rep.add_argument("--phi-step", type=float,
                     help="phi grid step for fig2/fig3")
    rep.add_argument("--grid", type=int,
                     help="number of s_eb points for fig4 (default 20)")
    rep.add_argument("--both-alpha", action="store_true",
                     help="fig2: emit an alpha=2 block after the alpha=3 one")

    def manifest_parser(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--manifest", required=True, help="JSON manifest path")
        p.add_argument("--out", help="output CSV path "
                                     "(default: manifest output_path)")
        return p

    p_map = manifest_parser("sor-map",
                            "polar boundary samples for one scheme")
    p_map.add_argument("--grid", type=int, default=721,
                       help="number of theta samples (default 721)")
    p_sop = manifest_parser("sop", "secrecy outage probability sweep")
    p_sop.add_argument("--phi-step", type=float, default=1e-3)
    p_opt = manifest_parser("optimize", "optimal jamming fraction sweep")
    p_opt.add_argument("--phi-step", type=float, default=1e-3)
    p_mc = manifest_parser("mc-validate",
                           "closed form vs finite-antenna Monte Carlo")
    p_mc.add_argument("--phi-step", type=float, default=1e-3)
    p_mc.add_argument("--seed", type=int,
                      help="Monte Carlo master seed (overrides manifest)")
    p_mc.add_argument("--threads", type=int,
                      help="Monte Carlo worker threads "
                           "(fallback: manifest, then SECRECY_SOR_THREADS)")
    return parser


def _reproduce(args):
    out = args.out or f"{args.figure}.csv"
    if args.figure == "fig2":
        n_rows, n_warn = _fig2(out, args.phi_step or 0.005, args.both_alpha)
    elif args.figure == "fig3":
        n_rows, n_warn = _fig3(out, args.phi_step or 0.01)
    elif args.figure == "fig4":
        n_rows, n_warn = _fig4(out, args.grid or 20)
    elif args.figure == "fig5":
        n_rows, n_warn = _fig5(out)
    else:
        n_rows, n_warn = _fig6(out)
    return out, n_rows, n_warn


def main(argv=None):
    args = build_parser().parse_args(argv)
    started = time.monotonic()
    try:
        if args.command == "reproduce":
            out, n_rows, n_warn = _reproduce(args)
            label = f"reproduce {args.figure}"
        else:
            need_region = args.command in ("sop", "mc-validate")
            manifest = load_manifest(args.manifest,
                                     need_sweep=args.command != "sor-map",
                                     need_region=need_region,
                                     need_mc=args.command == "mc-validate")
            if args.command == "sor-map":
                if args.grid < 2:
                    raise ManifestError("--grid", "need at least 2 samples")
                header, rows, guard = _run_sor_map(manifest, args.grid)
            elif args.command == "sop":
                header, rows, guard = _run_sop(manifest, args.phi_step)
            elif args.command == "optimize":
                header, rows, guard = _run_optimize(manifest, args.phi_step)
            else:
                threads = _resolve_threads(args.threads, manifest.mc)
                header, rows, guard = _run_mc_validate(
                    manifest, args.phi_step, args.seed, threads)
            out = args.out or manifest.output_path \
                or f"{args.command.replace('-', '_')}.csv"
            _write_csv(out, header, rows)
            n_rows, n_warn = len(rows), len(guard.notes)
            label = args.command
    except ManifestError as exc:
        print(f"manifest error at {exc}", file=sys.stderr)
        return 2
    elapsed = time.monotonic() - started
    print(f"{label}: wrote {out} ({n_rows} rows, {n_warn} warnings) "
          f"in {elapsed:.2f}s", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
