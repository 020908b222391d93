from .adapt import adapt_construct
from .compass import CandidateRecord, CompassReport, ScreeningError, compass_construct, factor_keys
from .operators import (
    ExcitationOperator,
    OperatorGroup,
    ScattererOperator,
    compiled_generator,
    single_group,
    spin_adapt,
)
from .pools import (
    POOL_KINDS,
    default_cso_set,
    doubles_groups,
    generate_double_pool,
    generate_scatterer_pool,
    generate_single_pool,
    generate_triple_pool,
    shares_cso,
    singles_groups,
    triples_groups,
)
from .program import AnsatzProgram, OperatorBlock
from .ucc import build_uccsd, build_uccsdt, closed_shell_counts, embed_parameters

__all__ = [
    "AnsatzProgram",
    "CandidateRecord",
    "CompassReport",
    "ExcitationOperator",
    "OperatorBlock",
    "OperatorGroup",
    "POOL_KINDS",
    "ScattererOperator",
    "ScreeningError",
    "adapt_construct",
    "build_uccsd",
    "build_uccsdt",
    "closed_shell_counts",
    "compass_construct",
    "compiled_generator",
    "default_cso_set",
    "doubles_groups",
    "embed_parameters",
    "factor_keys",
    "generate_double_pool",
    "generate_scatterer_pool",
    "generate_single_pool",
    "generate_triple_pool",
    "shares_cso",
    "single_group",
    "singles_groups",
    "spin_adapt",
    "triples_groups",
]
