"""Desk-scale hybrid quantum-classical machine learning toolkit.

Exact statevector simulation with analytic shift-rule gradients, a model zoo
(layered circuit classifiers, quantum LSTM, reservoir, fast-weight
programmer, probability-based weight generation), gridworld deep-Q control,
in-process federated averaging, and three architecture-search engines, all
driven by a seeded experiment CLI.
"""

__version__ = "0.1.0"

from .statevec import (  # noqa: F401
    ObservableSpec,
    Statevector,
    apply_gate,
    basis_probabilities,
    expectation,
    init_state,
    pauli_z,
    sample_shots,
)
from .circuit import (  # noqa: F401
    Binding,
    GateOp,
    ParamCircuit,
    build_layered,
    deserialize,
    final_state,
    load_circuit,
    run,
    run_batch,
    save_circuit,
    serialize,
)
from .autodiff import (  # noqa: F401
    Adam,
    AdamState,
    adam_step,
    finite_diff_grad,
    param_shift_grad,
    param_shift_jacobian,
    sgd_step,
)
