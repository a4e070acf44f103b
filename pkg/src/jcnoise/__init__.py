"""Thermal-noise effects on a two-level atom in a single-mode field.

Truncated Fock-space construction of coherent, thermal, displaced thermal,
mixed thermal-coherent and photon-added states; resonant Jaynes-Cummings
evolution; population inversion and atom-field negativity.
"""
__version__ = "0.1.0"

from .dynamics import (  # noqa: E402
    JCParams,
    JointState,
    build_hamiltonian,
    evolve_analytic,
    evolve_numeric,
    initial_joint_state,
)
from .errors import (  # noqa: E402
    CutoffTooSmall,
    DimensionMismatch,
    DomainError,
    EmptyWindow,
    MethodDiverged,
    NoConvergence,
    NonFinite,
    NotHermitian,
    ResonantOnly,
)
from .numerics import (  # noqa: E402
    hermitian_eigendecomposition,
    laguerre,
    matrix_exponential,
    partial_transpose_atom,
)
from .observables import (  # noqa: E402
    TimeSeries,
    negativity,
    population_inversion,
    revival_contrast,
    time_series,
)
from .states import (  # noqa: E402
    FieldParams,
    FieldState,
    closed_form_element,
    coherent_overlap,
    coherent_state,
    displaced_thermal,
    displacement_operator,
    equal_overlap_q,
    mtcs,
    number_state,
    pacs,
    photon_add,
    photon_distribution,
    purity_deficit,
    thermal_state,
)
