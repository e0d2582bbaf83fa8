"""Spectral and nuclear norms of real and complex tensors.

Lower bounds on the spectral norm come from multistart alternating
maximisation, upper bounds on the nuclear norm from an alternating method
whose inner step is a minimum-sum-of-norms convex program.  Both bounds are
backed by explicit witnesses (a rank-one tensor, a decomposition).
"""

from .tensor_core import (Field, RankOneDecomposition, RankOneTerm, Tensor, as_tensor, compress,
                          contract, expand, hs_norm, inner_product, khatri_rao, outer, realify,
                          refold, tensor_product, total_size, unfold)
from .symtensor import (SymRankOneTerm, SymTensor, densify, multiplicities, project_symmetric,
                        sorted_indices, sym_coefficients, sym_from_dense, sym_hs_norm,
                        sym_term_budget, symmetrize)
from .mnorm_socp import (MinSumNormsProblem, MinSumNormsSolution, SolverOptions, Status, solve)
from .spectral import SpectralResult, eta, spectral_lower, sym_spectral_lower
from .nuclear import (AltOptions, BudgetError, DualityProduct, NuclearResult, SymDecomposition,
                      duality_gap, nuclear_upper, omega, sym_nuclear_upper)
from .quantum import (BoundRecord, DensityTensor, SeparabilityVerdict, Verdict, dtrace, known_state,
                      known_state_names, ppt_check, pure_density, qubit_bounds, separability_check,
                      separable_mixture)
from .search import (ExperimentConfig, ExperimentReport, random_separable_density, random_state,
                     run_experiment)
from .fileio import (TensorFileError, emit_report, load_decomposition, load_density, load_tensor,
                     save_decomposition, save_tensor)

__version__ = "0.1.0"

__all__ = [name for name, obj in dict(globals()).items()
           if not name.startswith("_") and type(obj).__name__ != "module"]
