"""Exact DPP likelihoods, diagonal-kernel certificates and the
Max-3SAT to DPP-learning reduction toolkit.

The hot numerical kernels come from a compiled extension when it is built;
``dppmle.BACKEND`` says which implementation is active.
"""
from dppmle._accel import BACKEND
from dppmle.dataset import Dataset, EmpiricalStats, empirical_stats, parse_dataset, serialize_dataset
from dppmle.diagonal import (ApproxCertificate, certificate, diag_log_likelihood, diagonal_kernel,
                             factor_full_elements, hadamard_lower_bound, ratio_function_f)
from dppmle.kernel import (EnsembleKernel, GramFactor, MarginalKernel, ValidationReport,
                           enumerate_distribution, factor_to_kernel, from_l_ensemble,
                           log_likelihood, point_probability, subset_marginal, to_l_ensemble,
                           validate_kernel)

__version__ = "0.1.0"
