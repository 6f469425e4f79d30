"""H4 ring: integrals, RHF/MP2, Jordan-Wigner Hamiltonian, UCCD-VQE and iterative phase estimation."""

__version__ = "0.1.0"

from .kernels import BACKEND
from .errors import (ConfigError, DegenerateDenominator, DegenerateGeometry, ExperimentFailed,
                     H4Error, InvalidInput, MissingLabel, ScfNotConverged, SectorLeak,
                     SingularGeometry, StateCorrupt, UnsupportedPlot)
from .molsys import build_h4_geometry, compute_integrals, h4_integrals, load_sto3g_hydrogen
from .scf import mp2_amplitudes, run_rhf, to_spin_orbitals
from .qham import PauliString, PauliSum, QubitHamiltonian, jordan_wigner, map_excitation
from .simstate import Statevector, basis_state, build_evolution_cache, expectation
from .ansatz import build_minimal_pool, build_pool, build_uccd_pool, prepare_state
from .vqe import VqeConfig, run_vqe, state_at_iteration
from .fci import fci_solve, overlaps
from .iqpe import build_phase_window, phase_to_energy, repeat_experiment, run_iqpe
from .experiments import build_system, parse_prep, prepare
