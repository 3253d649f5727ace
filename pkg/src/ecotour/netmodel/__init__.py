from .energy import EnergyParams, edge_energy, traction_force
from .graph import (Arc, LineGraph, RoadEdge, RoadNetwork, TimeWindowTable, Turn,
                    build_line_graph, classify_turn, compass_to_ccw, is_conflicting_left)
from .io import Instance, load_instance, save_instance
from .pareto import ParetoArchive, dominated_area, lower_hull, pareto_filter, supported_subset
from .tour import (CostVector, Tour, any_visit_schedule, dominates, evaluate_tour, has_revisit,
                   path_cost, strictly_dominates, visit_counts)
