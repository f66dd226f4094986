"""Ancestor regression for linear structural equation models."""

from ._ancreg import (
    CycleError,
    DegenerateFit,
    DomainError,
    EmptyAncestors,
    Error,
    GraphResult,
    InvalidInput,
    MomentError,
    NonFiniteError,
    ParseError,
    RankDeficient,
    SemSpec,
    ShapeError,
    ancestor_scan,
    build_recursive,
    builtin_spec,
    detect_graph,
    find_structure,
    holm,
    load_sem_spec,
    model_check_pvalue,
    parent_tests,
    parse_sem_spec,
    random_sem,
    run_cli,
    simulate,
    simulate_equilibrium,
)

__version__ = "0.1.0"
