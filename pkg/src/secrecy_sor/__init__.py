"""Secrecy outage regions and outage probabilities for a large uniform linear
array that superimposes artificial noise on its data beam.

The package is organized bottom-up:

- ``crosstalk``:  array steering, the angular crosstalk kernel and its lobe
  landmarks, and the crosstalk distribution for a uniformly random angle.
- ``asymptotic``: large-array secrecy outage region (SOR) boundaries for
  uniform and directional jamming, lobe radii, and region areas.
- ``sop``:        secrecy outage probability (SOP) against randomly located
  eavesdroppers, closed form and geometric, plus the "does jamming help" test.
- ``alloc``:      jamming power optimization - closed forms, grid oracles, and
  the three directional allocation algorithms.
- ``mc_oracle``:  finite-antenna Monte Carlo engine used as an independent
  check of every closed form.
- ``multiuser``:  per-user SOR boundaries when several users share the array.
- ``cli``:        the ``secrecy-sor`` command line front end.
"""

from .errors import DegenerateArrayError, InfeasibleRateError, ResolutionWarning
from .crosstalk import (
    ArrayGeometry,
    CrosstalkProfile,
    LobeLandmarks,
    cross_points,
    crosstalk_cdf,
    delta_cdf,
    normalized_crosstalk,
    peak_value,
    s_kernel,
    s_max_feasible,
    steering_vector,
)
from .asymptotic import (
    PowerAllocation,
    ScenarioConfig,
    SorBoundary,
    boundary_scale,
    delta_theta_max,
    lobe_radii,
    phi_max,
    side_lobe_area_bound,
    sinr_bob_uniform,
    sinr_eve_uniform,
    sor_area,
    sor_boundary_directional,
    sor_boundary_nojam,
    sor_boundary_uniform,
    sor_constants,
)
from .sop import (
    SuspiciousRegion,
    is_jamming_beneficial,
    jamming_beneficial_dmax,
    region_area,
    sop_closed_form,
    sop_intersection,
    sor_region_overlap,
)
from .alloc import (
    AllocationResult,
    DftJammingBasis,
    algorithm1_directional,
    algorithm2_iterative,
    algorithm3_two_lobes,
    build_dft_basis,
    grid_oracle_phi,
    optimize_phi_uniform,
    phi_opt_closed_form,
    sector_area_bound,
)
from .mc_oracle import (
    ChannelDraw,
    McRunSpec,
    draw_channel,
    empirical_crosstalk,
    empirical_sinr,
    empirical_sop,
    null_space_basis,
    secrecy_outage_count,
    sinr_exact,
)
from .multiuser import MultiuserScenario, mu_sor_boundary, mu_worst_area

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"
