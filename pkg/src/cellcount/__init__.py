"""Hashing-based approximate model counting and witness sampling."""
from .counting import ApproxCount, AllIterationsFailed, approx_dnf_count, approxmc2, compute_count_params
from .formula import (Assignment, CnfFormula, DimacsError, DnfFormula, ProblemInstance, WeightMap, XorClause,
                      parse_dimacs, serialize_dimacs)
from .indsupport import build_q_formula, is_independent_support, mis
from .relnet import brute_force_unreliability, estimate_unreliability, parse_graph
from .sampling import (UniGen, UniGen2, WeightGen, compute_kappa_pivot, unigen2_estimate, unigen2_generate,
                       unigen2_parallel, unigen_sample, weightgen_sample)
from .weighted import (reduce_constraint_wmc, reduce_wmc_conjunctive, reduce_wmc_form_preserving,
                       reduce_wmc_implicative, weightmc)

__version__ = "0.1.0"
