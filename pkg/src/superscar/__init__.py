"""Gaussian quasimodes on translation surfaces and rational polygons."""
__version__ = "0.1.0"

from .errors import SuperscarError
from .geometry import (build_surface, cone_angles, fold_point, l_surface,
                       rectangle_torus, square_torus, unfold_rational_polygon)
from .flow import (enumerate_translates, find_cylinder, search_periodic_directions,
                   time_budget, trace_flow, verify_no_self_intersection)
from .wavepacket import (EuclideanQuasimodeEval, SemiclassicalParams, TimeWindow,
                         coherent_state_value, euclidean_quasimode_value,
                         free_evolution_value)
from .spectral import defect_norm_squared, norm_squared, spectral_width_report
from .surface import (build_surface_quasimode, surface_norm_squared,
                      surface_quasimode_value, surface_spectral_width)
from .semiclassical import (dirac_limit_error, localization_mass, momentum_density,
                            weyl_matrix_element)
from .experiments import ExperimentConfig, fit_power_law, run_sweep
