from .local import run_local_search
from .operators import fixed_perm, quad, rand_permute, repair_tw, s3opt, s3opt_tw
from .select import gain, kde_density, select_tour_kde, selection_pmf
from .state import EdgeStats, SearchState, Theta, update_sets
