"""Unpaired denoising by exact minibatch optimal transport.

The package has three layers:

* exact discrete transport solvers (:mod:`otdenoise.solvers`) and
  brute-force verification of the relaxed-objective equivalence they
  rest on (:mod:`otdenoise.theory`);
* a small trainable denoiser with hand-rolled reverse-mode gradients
  whose training objective couples an input-fidelity term with an
  exact minibatch Wasserstein-1 penalty (:mod:`otdenoise.nets`,
  :mod:`otdenoise.losses`, :mod:`otdenoise.training`);
* synthesis, baselines, metrics and a CLI harness around them.
"""

from otdenoise.measures import Coupling, CostSpec, EmpiricalMeasure, TransportMap
from otdenoise.solvers import (
    ground_cost_matrix,
    kantorovich_lp,
    monge_assignment,
    sinkhorn,
    w1_1d,
)

__version__ = "0.1.0"

__all__ = [
    "Coupling",
    "CostSpec",
    "EmpiricalMeasure",
    "TransportMap",
    "ground_cost_matrix",
    "kantorovich_lp",
    "monge_assignment",
    "sinkhorn",
    "w1_1d",
    "__version__",
]
