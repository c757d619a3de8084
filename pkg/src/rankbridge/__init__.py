"""Low-rank completion through tensor rank.

A partially observed matrix (or tensor) ``A`` with ``s`` unknown slots is
lifted to a tensor whose rank is exactly ``rank(A, U) + s``. Decompositions
of the lifted tensor convert back into minimal-rank completions.
"""
from .errors import (
    BadIndex,
    BudgetExceeded,
    DependentGenerators,
    DivisionByZero,
    ExceedsMax,
    InconsistentDecomposition,
    NoFitFound,
    RankBridgeError,
    ShapeMismatch,
    SpanningFailure,
    ValidationError,
)
from .fields import FieldSpec, field_ops
from .tensor import (
    CPDecomposition,
    DenseTensor,
    LinearFunctional,
    PureTensor,
    basis_vector,
    contract,
    contract_mode,
    expand,
    flatten,
    flattening_bound,
    matrix_rank,
)
from .completion import (
    AffineTensorSpace,
    Completion,
    PartialMatrix,
    apply_completion,
    membership,
    to_affine_space,
    validate_generators,
)
from .reduction import HatTensor, TildeTensor, build_hat, build_tilde, embed_completion, extract_completion
from .exact import (
    RankCertificate,
    SearchBudget,
    brute_force_min_rank,
    rank_one_completion,
    tensor_rank,
    verify_theorem,
    verify_tilde,
)

__version__ = "0.1.0"
