"""Bounds on a Svetlichny-type family of n-party correlation expressions."""
from .scenario import Derived, Event, Native, Scenario, exclusive, parse_event
from .sigma import SigmaExpression, build_sigma, build_sn, sigma_value
from .graph import ExclusivityGraph, build_graph, independence_number, is_vertex_transitive
from .theta import lovasz_theta
from .doubling import build_family, derive_bound, verify_family
from .models import hybrid_bound, local_bound, ns_box, optimize_sn_angles

__version__ = "0.1.0"
