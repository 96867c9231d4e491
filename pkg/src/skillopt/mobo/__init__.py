from .acquisition import expected_improvement, normalize_objectives, scalarize, simplex_weights
from .gp import GpFitError, GpModel, fit_gp, matern52, posterior
from .loop import Acquisition, BoSettings, build_acquisition, optimize, propose_next
from .pareto import Observation, ParetoFront, dominates, hypervolume_2d, pareto_filter, pareto_mask
from .space import ParameterSpace, SpaceError, initial_design, sobol_points
