"""Exact-diagonalization laboratory for occupation-number entanglement of fermions."""
from .cone import (
    ConeSpec,
    EntanglementReport,
    StateFunctional,
    decompose_unique,
    e1_closed_form,
    entanglement_general,
    grid_search_minimum,
    purity_check,
    shannon_entropy,
)
from .correlators import (
    HOLE,
    PARTICLE,
    AlphaResult,
    KernelParams,
    ProbeSpec,
    alpha_from_spectrum,
    cone_states,
    filtered_correlator,
    mode_occupation_correlator,
    pauli_check,
    probe_level_correlator,
    quadratic_probe_level_oracle,
    read_spectrum_table,
    select_mode,
    write_spectrum_table,
)
from .fock import (
    FockBasis,
    FockVector,
    SecondQuantizedOperator,
    algebra_selftest,
    apply_ladder,
    apply_operator,
    c,
    cdag,
    expectation,
    materialize,
)
from .models import (
    ModelConfig,
    QdFormulaInputs,
    bcs_uv_oracle,
    build_hamiltonian,
    build_model,
    perturbation_oracle,
    qd_entanglement_formula,
    single_particle_modes,
)
from .spectra import ground_state, low_spectrum

__version__ = "0.1.0"

__all__ = [
    "AlphaResult",
    "ConeSpec",
    "EntanglementReport",
    "FockBasis",
    "FockVector",
    "HOLE",
    "KernelParams",
    "ModelConfig",
    "PARTICLE",
    "ProbeSpec",
    "QdFormulaInputs",
    "SecondQuantizedOperator",
    "StateFunctional",
    "algebra_selftest",
    "alpha_from_spectrum",
    "apply_ladder",
    "apply_operator",
    "bcs_uv_oracle",
    "build_hamiltonian",
    "build_model",
    "c",
    "cdag",
    "cone_states",
    "decompose_unique",
    "e1_closed_form",
    "entanglement_general",
    "expectation",
    "filtered_correlator",
    "grid_search_minimum",
    "ground_state",
    "low_spectrum",
    "materialize",
    "mode_occupation_correlator",
    "pauli_check",
    "perturbation_oracle",
    "probe_level_correlator",
    "purity_check",
    "qd_entanglement_formula",
    "quadratic_probe_level_oracle",
    "read_spectrum_table",
    "select_mode",
    "shannon_entropy",
    "single_particle_modes",
    "write_spectrum_table",
]
