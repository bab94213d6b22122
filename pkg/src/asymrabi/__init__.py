"""Asymmetric quantum Rabi model: exact ground states, polaron structure,
and the displacement transitions g0 and epsilon_c."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    AsymmetricParams,
    HamiltonianMatrix,
    ModelParams,
    build_hamiltonian,
    critical_coupling,
    from_asymmetric_form,
)
from .eigensolver import (  # noqa: E402
    GroundState,
    IterationLimit,
    NonConvergence,
    SolverOptions,
    dense_oracle_ground_state,
    ground_state,
)
from .observables import (  # noqa: E402
    ObservableSet,
    VanishingWeight,
    conditional_displacement,
    entanglement_entropy,
    observables,
    parity_expectation,
)
from .wavefunction import (  # noqa: E402
    PolaronWeights,
    PositionWaveFunction,
    is_anti_polaron_overweighted,
    polaron_weights,
    synthesize,
)
from .variational import (  # noqa: E402
    VariationalSolution,
    energy_four_coherent,
    energy_small_g,
    energy_two_state,
    minimize_four_coherent,
    minimize_small_g,
    minimize_two_state,
    small_g_solution,
)
from .sweep import (  # noqa: E402
    NoSignChange,
    SweepResult,
    TransitionPoint,
    find_epsilon_c,
    find_g0,
    scan_g,
)
