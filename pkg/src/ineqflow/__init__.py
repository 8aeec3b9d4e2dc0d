"""Continuous-time distributed subgradient flows for convex inequalities
and inequality-constrained optimization over switching digraphs."""

from .analysis import (consensus_residuals, detect_consensus, diameter, infeasibility,
                       lagrangian, verify_contraction_bound)
from .config import ExperimentConfig, load_config, parse_config, write_config
from .functions import (Affine, ConvexQuadratic, HuberQuadratic, MaxOfAffine, PlusFunction)
from .gains import Constant, GeneralizedHarmonic, Harmonic
from .graph_model import (ContractionConstants, GraphSchedule, WeightedDigraph, adjacency_at,
                          contraction_constants, delta_graph, is_balanced,
                          is_strongly_connected, laplacian, transition_matrix)
from .presets import preset
from .simulator import (ConstrainedOptProblem, FeasibilityProblem, SimConfig, SimState,
                        run, step)
from .trace import Trace

__version__ = "0.1.0"
