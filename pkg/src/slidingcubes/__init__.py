"""Sliding cube reconfiguration: compacting a polycube and moving between shapes.

Modules live on the integer lattice and move one at a time by slides and
convex transitions while the rest stays connected.  The main entry points:

    >>> from slidingcubes import Configuration, compactify, reconfigure, verify_trace
    >>> c = Configuration([(0, 0, 0), (0, 0, 1), (0, 0, 2)])
    >>> res = compactify(c)
    >>> verify_trace(c, res.trace).ok
    True
"""
from .compactify import CompactifyResult, CompactifyStall, compactify
from .fix import FixError, FixPlan, find_target_p, fix, is_fixable
from .lattice import (
    Configuration, ConfigurationError, OpCounter, SliceGraph, build_slice_graph, compactness_flags,
    coordinate_sum, dominates, is_compact_configuration, is_compact_module, is_connected,
    is_quasi_compact_module, is_removable, outer_boundary_modules, parse_configuration,
    read_configuration, write_configuration,
)
from .lowering import ClusterTree, LowerReport, build_cluster_tree, lower_cluster
from .moves import (
    CONVEX, SLIDE, InvalidMove, Move, Trace, VerifyReport, apply_move, enumerate_moves, read_trace,
    replay, validate_move, verify_trace, write_trace,
)
from .musketeers import MusketeerSquad, advance_formation, harvest_musketeers, transit_musketeers
from .reconfigure import (
    ReconfigPlan, find_m1, find_m2, monotone_surface_path, read_plan, reconfigure, reconfigure_compact,
    write_plan,
)

__version__ = "0.1.0"
