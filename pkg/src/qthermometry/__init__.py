"""Single-qubit thermometry with a generalized amplitude damping probe."""
from .channel import (
    KrausSet,
    apply_channel,
    bloch_to_density,
    cptp_check,
    density_to_bloch,
    gad_kraus_set,
)
from .circuit import damping_angle, simulate_ad_circuit, simulate_gad_circuit, simulate_iad_circuit
from .metrology import (
    MetrologyReport,
    SingularityError,
    bound_ratio,
    classical_fisher_energy,
    crb_energy,
    energy_variance,
    equilibrium_hc,
    equilibrium_qfi,
    heat_capacity,
    mean_energy,
    metrology_report,
    qcrb,
    qfi_closed_form,
    qfi_from_sld,
    qfi_numeric_oracle,
    qfi_terms,
    sld_coefficients,
)
from .model import (
    EXCITED,
    GROUND,
    BlochDerivative,
    BlochState,
    DegenerateStateError,
    DomainError,
    GadParams,
    PolarBloch,
    equilibrium_bloch,
    evolve_bloch,
    evolve_bloch_dT,
    from_polar,
    occupation_derivative,
    planck_occupation,
    polar_derivatives,
    to_polar,
)
from .scan import ScanGrid, ScanResult, figure_curves, find_qfi_zero, optimal_preparation, optimal_time, scan_qfi
from .shots import ShotRecord, energy_estimate, invert_temperature, sample_shots, temperature_uncertainty

__version__ = "0.1.0"
