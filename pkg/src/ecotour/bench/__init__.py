from .compare import FrontierReport, compare_frontiers
from .generator import gen_instance, tighten
from .oracle import brute_force_pareto, enumerate_by_permutation, exists_feasible_tour
from .spb import load_spb, parse_spb, synthetic_spb, write_synthetic_suite
