"""Finite-atom laboratory for lattice-normed L_p spaces.

Models a K-atom base space, an N-atom Boolean algebra, and a strictly
positive vector-valued measure; realizes sections, vector-valued norms,
fibered operators and their partition-net modulus; and drives the
zero-two dichotomy for positive contractions, one verdict per base atom.
"""

from .lattice import (
    BaseSpace,
    BooleanAtoms,
    Model,
    PartitionOfUnity,
    VectorMeasure,
    absolute,
    indicator_mul,
    join,
    leq,
    meet,
    module_mul,
    refinement_chain,
    validate_measure,
    vec_norm,
)
from .norms import (
    NormResult,
    is_contraction,
    l0_opnorm,
    opnorm,
    opnorm_boyd,
    opnorm_exact,
    opnorm_oracle,
)
from .operators import (
    FiberedOperator,
    ModulusReport,
    apply,
    compose,
    gen_contraction,
    majorant_check,
    modulus_direct,
    modulus_net,
    partition_step,
    power,
)
from .zerotwo import (
    CONVERGES_TO_ZERO,
    STUCK_AT_TWO,
    UNDECIDED,
    DichotomyTrace,
    FiberVerdict,
    check_hypothesis,
    classify,
    compare_fiber_global,
    run_dichotomy,
)

__version__ = "0.1.0"
