"""Exact critical probabilities, explicit moment lower bounds and Monte
Carlo oracles for threshold ("r-neighbour") infection on random trees with
i.i.d. offspring counts."""

__version__ = "0.1.0"

from ._compute import BACKEND  # noqa: F401  (resolves backend + thread cap)
from .bounds import (IntegralCheck, LowerBoundReport, SharpnessSweep, SweepRow,
                     alpha_grid, asymptotic_ratio, integral_moment_check,
                     moment_lower_bound, rth_moment_bound, sharpness_sweep)
from .critical import (CriticalProfile, RecursionTrace, critical_probability,
                       maximize_kernel, recursion_limit, recursion_step,
                       threshold_by_bisection)
from .distspec import load_dist_spec, parse_dist_spec
from .errors import (CapabilityError, ConstructionError, DiagnosticError,
                     DomainError, GwbootError, SizeError, ValidationError)
from .kernels import KernelEvaluation, degree_kernel, mean_kernel
from .offspring import (EtaParams, OffspringDistribution, SeedSpec,
                        make_constant, make_corpus, make_eta, make_geometric,
                        make_poisson, make_powerlaw, make_table, moment,
                        sample_offspring, truncate)
from .simulator import (SampledTree, SimConfig, SimEstimate, bootstrap_closure,
                        estimate_uninfected_root, sample_tree,
                        subtree_infected_bottom_up)
from .specfun import (GautschiBracket, binom_tail_le, gautschi_bracket,
                      log_beta, log_binomial, log_gamma)

__all__ = [name for name in dir() if not name.startswith("_")]
