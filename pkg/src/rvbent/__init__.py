"""Entanglement toolkit for resonating-valence-bond spin states.

Exact enumeration and Monte Carlo estimation of two-spin correlators in
valence-bond superpositions, Werner-state entanglement measures, closed
forms for the bipartite "gas" ensemble, coordination-number bounds, and
finite-size extrapolation.
"""

from ._version import __version__
from .lattice import BoundaryCondition, Lattice, bond_orbits, build_lattice
from .vbstate import (CoveringKind, DimerCovering, LoopDecomposition, OverlapWeight,
                      loop_estimator, overlap_weight, transition_graph)
from .exact import (Ensemble, EnumerationResult, ExactCorrelator, SizeLimitError,
                    enumerate_bipartite_pairings, enumerate_nn_coverings,
                    exact_gas_correlator, exact_nn_correlator, statevector_oracle)
from .analysis import (BoundStatus, FitResult, WernerSummary, anderson_bound, check_bound,
                       concurrence, entanglement_verdict, eof, extrapolate,
                       gas_closed_forms, werner_p, werner_summary)
from .mc import McConfig, McResult, McState, init_state, measure, run_chain

__all__ = [name for name in dir() if not name.startswith("_")]
