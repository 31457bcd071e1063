"""Collective decay, mode transfer and photon storage in 1D atomic chains."""

from .dynamics import (
    ChainRuntime,
    DetuningPattern,
    DriveConfig,
    Phase,
    ProtocolResult,
    ProtocolSchedule,
    RecordSpec,
    TimeSeries,
    drive_hamiltonian,
    emitted_population_by_mode,
    extract_transition_time,
    instantaneous_decay,
    integrate,
    make_standard_schedule,
    manifold_populations,
    mode_projection,
    pvd_hamiltonian,
    run_protocol,
    total_population,
)
from .fock import (
    DensityMatrix,
    RecyclingChannel,
    TruncatedBasis,
    build_basis,
    embed_hamiltonian,
    embed_pair_vector,
    embed_single_vector,
    lowering_operator,
    me_rhs,
    number_diagonal,
)
from .geometry import (
    K0,
    ChainGeometry,
    CouplingMatrices,
    coupling_matrices,
    dyadic_green,
    green_projection,
)
from .modes import (
    CollectiveMode,
    TwoExcitationMode,
    analytic_dispersion,
    double_modes,
    fermionic_ansatz,
    kz_of_mode,
    pair_basis,
    pair_block_hamiltonian,
    polylog,
    sine_ansatz,
    single_modes,
    two_photon_drive_overlap,
)
from .radiation import FarFieldPattern, cone_angle, far_field_pattern
from .rate_model import (
    RateModelConfig,
    SubradiantFit,
    equal_weight_band,
    evolve_rate_model,
    fit_subradiant_scaling,
    gamma_closed_form,
    kappa_ratio,
    pair_decay_rate,
    pop_closed_form,
    rate_config_from_chain,
    rate_model_population,
    transition_time_formula,
)

__version__ = "0.1.0"
