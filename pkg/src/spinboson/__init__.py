"""Spin-boson lattice magnet: mean-field, polaron and dispersive theories,
excitation bands, probe spectroscopy, exact diagonalisation and circuit
parameter mapping for a 1D chain of qubits coupled to cavity arrays."""

from .core import (
    Boundary,
    CouplingPattern,
    DerivedScales,
    GridConvention,
    ModelParams,
    MomentumGrid,
    derive_scales,
    momentum_grid,
)
from .errors import (
    ConvergenceError,
    DimensionError,
    FitError,
    SpinBosonError,
    ValidationError,
)
from .ising import BogoliubovMode, bogoliubov_mode, ising_gs_energy, ising_magnetization
from .meanfield import (
    MfSolution,
    mf_critical_omega0,
    mf_polarizations,
    solve_mf,
    solve_mf_params,
)
from .polaron import (
    AnsatzGroundState,
    ansatz_critical_g,
    ansatz_critical_omega0,
    ansatz_ground_state,
    ansatz_polarizations,
)
from .excitations import (
    BandScan,
    BlockConvention,
    ExponentFit,
    QuasiparticleBlock,
    Theory,
    ansatz_bands,
    ansatz_block,
    band_scan,
    critical_params,
    dispersive_bands,
    fit_exponents,
    make_critical_path,
    sw_bands,
)
from .spectroscopy import (
    GreensFunctions,
    Peak,
    ProbeParams,
    SpecMatrix,
    SpectroscopyResult,
    analytic_response,
    build_spec_matrix,
    contact_self_energy,
    extract_peaks,
    resolvent_greens,
    sine_time_fourier,
)
from .ed import (
    EdCache,
    EdResult,
    Trajectory,
    TruncationSpec,
    build_hamiltonian,
    build_hamiltonian_parts,
    cache_key,
    coherent_state,
    ed_ground,
    evolve,
    ground_state,
    hilbert_dim,
    site_operators,
    spectroscopy_experiment,
)
from .circuit import (
    CircuitParams,
    EffectiveModel,
    QubitType,
    critical_cavity_frequency,
    renormalize_circuit,
)

__version__ = "0.1.0"
