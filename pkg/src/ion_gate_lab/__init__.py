"""Single-pulse controlled-NOT gates for trapped ions.

Magic Lamb-Dicke parameters, Fock-state Rabi frequencies, pulse propagators
and gate verification.
"""

__version__ = "0.1.0"

from .coupling import (
    HBAR,
    CouplingContext,
    PhysicalParams,
    RamanBeams,
    context_from_params,
    lamb_dicke,
    micromotion_corrected_eta,
    rabi_frequency,
    raman_effective_g,
    zero_point_spread,
)
from .dynamics import (
    ConvergenceWarning,
    JointSpace,
    Propagator,
    Pulse,
    StateVector,
    carrier_block_unitary,
    displacement_matrix,
    numeric_propagator,
    rwa_propagator,
    sideband_block_unitary,
)
from .magic import MagicEntry, magic_eta_01, magic_eta_pair, magic_table
from .sequence import (
    FidelityReport,
    Schedule,
    TruthTableReport,
    apply_schedule,
    compose_cn,
    eta_sensitivity,
    map_pulse,
    reduced_cn_pulse,
    truth_table,
    verify_eq6,
)
from .specfun import LaguerreSpec, laguerre, sqrt_factorial_ratio
