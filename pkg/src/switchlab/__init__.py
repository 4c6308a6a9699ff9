"""Exact Root/Rost embedding and switching-identity laboratory for lattice random walks."""
from .barriers import ROOT, ROST, Barrier, make_barrier, reflect
from .exit_law import StoppedLaw, expectation, stopped_law
from .identities import (IdentityReport, compute_interpolation, verify_core, verify_monotone,
                         verify_replacement, verify_root_identity, verify_rost_identity,
                         verify_switch_rectangle, verify_symmetry)
from .kernel import (KernelTable, greens_partial, kernel_canonical, kernel_synthetic,
                     verify_compensator)
from .measures import LatticeMeasure, convex_order, dirac, make_measure, potential
from .stopping import PayoffSpec, StoppingRule, ValueFunction, evaluate_rule, rule_from_barrier, solve

__version__ = "0.1.0"
