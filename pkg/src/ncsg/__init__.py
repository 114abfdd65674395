"""Matrix symbols, quantization and spectral diagnostics on T^n and SU(2)."""
from .errors import (AliasingError, ConfigError, DimensionError, DomainError, EmptyDualError,
                     ExprSyntaxError, FormatError, GroupMismatchError, NcsgError)
from .fourier import (FourierCoefficients, MatrixField, ScalarField, analyze, norms, synthesize)
from .group import GroupDescriptor, Irrep, admissible_family, make_group, quadrature_grid
from .spectral import (WitnessSpec, compactness_diagnostic, dmin_dmax, essential_normality_check,
                       gohberg_check, lemma_decay_check, resolvent_bound, shell_profile, witness)
from .symbol import (Symbol, SymbolSpec, assemble_operator_matrix, build_symbol, difference_op,
                     ellipticity_check, extract_symbol, kernel_R, multiplier_symbol, quantize_apply,
                     seminorm_report, separable_symbol)

__version__ = "0.1.0"
