"""Several legitimate users served by the same array.

Each user gets a maximum-ratio beam carrying their own power budget; every
other user's beam doubles as jamming toward an eavesdropper trying to
intercept them, on top of any dedicated noise allocation.  Users must be
separated by at least one full main-lobe width so the beams stay
effectively orthogonal and each user's rate constraint involves only their
own beam (inter-user interference at the legitimate receivers vanishes in
the large-array limit this module works in).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .asymptotic import (
    ScenarioConfig,
    _arcs_for_grid,
    _default_arcs,
    _finish_boundary,
    boundary_scale,
    directional_jam_response,
    sor_area,
)
from .crosstalk import ArrayGeometry, s_kernel
from .errors import InfeasibleRateError

_HALF_PI = 0.5 * np.pi


@dataclass(frozen=True)
class MultiuserScenario:
    """Shared array, per-user beams.

    ``user_powers[u]`` is the signal power (Watts) on user ``u``'s beam;
    there is no pooled budget.  All users share the target rate and the
    eavesdropper geometry statistics.
    """

    geometry: ArrayGeometry
    alpha: float
    n0: float
    r_th: float
    user_thetas: tuple
    user_dists: tuple
    user_powers: tuple
    k_eb: float = 1.0

    def __post_init__(self):
        for name in ("user_thetas", "user_dists", "user_powers"):
            object.__setattr__(self, name,
                               tuple(float(v) for v in getattr(self, name)))
        if not (2.0 <= self.alpha <= 6.0):
            raise ValueError("alpha must lie in [2, 6]")
        if self.n0 <= 0:
            raise ValueError("n0 must be positive")
        if self.r_th <= 0:
            raise ValueError("r_th must be positive")
        if not (0.0 <= self.k_eb <= 1.0):
            raise ValueError("k_eb must lie in [0, 1]")
        n_users = len(self.user_thetas)
        if n_users < 1:
            raise ValueError("need at least one user")
        if len(self.user_dists) != n_users or len(self.user_powers) != n_users:
            raise ValueError("user_thetas, user_dists, user_powers must align")
        if any(abs(t) > _HALF_PI for t in self.user_thetas):
            raise ValueError("user angles must lie in [-pi/2, pi/2]")
        if any(d <= 0 for d in self.user_dists):
            raise ValueError("user distances must be positive")
        if any(p <= 0 for p in self.user_powers):
            raise ValueError("user powers must be positive")
        geom = self.geometry
        gap = 2.0 / (geom.n_antennas * geom.spacing)
        sins = np.sin(self.user_thetas)
        for u in range(n_users):
            for v in range(u + 1, n_users):
                if abs(sins[u] - sins[v]) < gap:
                    raise ValueError(
                        f"users {u} and {v} are closer than one main-lobe "
                        f"width ({gap:.4g} in the sine domain); their beams "
                        "would not separate")

    @property
    def n_users(self):
        return len(self.user_thetas)

    def user_config(self, user_index):
        """Single-user view of one user (their beam only)."""
        return ScenarioConfig(
            geometry=self.geometry, alpha=self.alpha,
            p_tot=self.user_powers[user_index], n0=self.n0, r_th=self.r_th,
            bob_theta=self.user_thetas[user_index],
            bob_dist=self.user_dists[user_index], k_eb=self.k_eb)


def mu_sor_boundary(scn, user_index, jam_alloc=None, theta_grid=None):
    """Secrecy outage boundary for one user.

    An eavesdropper after user ``u`` receives u's beam through the crosstalk
    kernel and is disturbed by every other user's beam plus the optional
    dedicated noise allocation.  A ``null_space_uniform`` allocation avoids
    all user beams at once, so the noise an eavesdropper collects scales
    with whatever fraction of her channel the beams leave uncovered.
    """
    if not 0 <= user_index < scn.n_users:
        raise ValueError("user_index out of range")
    cfg_u = scn.user_config(user_index)
    try:
        scale = boundary_scale(cfg_u, 0.0)
    except InfeasibleRateError as err:
        err.user_index = user_index
        raise
    if theta_grid is None:
        thetas, arcs = _default_arcs(cfg_u)
    else:
        thetas, arcs = _arcs_for_grid(cfg_u, theta_grid)
    geom = scn.geometry
    sin_th = np.sin(thetas)
    sins = np.sin(scn.user_thetas)
    s_user = scn.k_eb * s_kernel(np.abs(sin_th - sins[user_index]), geom)
    jam = np.zeros_like(thetas)
    for v in range(scn.n_users):
        if v != user_index:
            jam += (scn.user_powers[v] / scn.n0) * geom.n_antennas \
                * s_kernel(sin_th - sins[v], geom)
    if jam_alloc is not None:
        if jam_alloc.basis == "null_space_uniform":
            covered = np.zeros_like(thetas)
            for v in range(scn.n_users):
                covered += scn.k_eb * s_kernel(sin_th - sins[v], geom)
            jam += (np.sum(jam_alloc.beam_powers) / scn.n0) \
                * np.clip(1.0 - covered, 0.0, None)
        else:
            jam += directional_jam_response(cfg_u, jam_alloc, thetas)
    gap = np.clip(scale * s_user - jam, 0.0, None)
    radii = np.where(np.abs(thetas) <= _HALF_PI,
                     gap ** (1.0 / scn.alpha), 0.0)
    return _finish_boundary(cfg_u, thetas, arcs, radii)


def mu_worst_area(scn, jam_alloc=None):
    """(area, user_index) of the user with the largest outage region; ties
    go to the smallest index."""
    areas = [sor_area(mu_sor_boundary(scn, u, jam_alloc))
             for u in range(scn.n_users)]
    worst = int(np.argmax(areas))
    return float(areas[worst]), worst
