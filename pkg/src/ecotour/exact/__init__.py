from .bnb import SolveResult, Status, solve_branch_and_bound, solve_milp
from .lpformat import LpProblem, export_lp, format_lp, parse_lp, read_lp
from .model import BigM, MipModel, build_model, compute_big_m, expected_counts, extract_walk
from .scalarization import ScalarizationResult, below_segment, scalarize, segment_weights
