"""Exact-arithmetic probabilistic thread algebra.

Regular probabilistic threads with canonical forms, named services and
the use operator, an assembly-like probabilistic instruction notation,
strategic interleaving under pluggable schedulers, and exact outcome
analysis.  All probabilities are exact rationals.
"""

from . import errors
from .analysis import (
    EMPTY_ENVIRONMENT,
    Environment,
    OutcomeDistribution,
    outcome_distribution,
    sample_outcomes,
    sample_run,
)
from .interaction import abstract_tau, use
from .interleaving import (
    SchedulerSpec,
    builtin_scheduler,
    cyclic_scheduler,
    deadlock_at_termination,
    interleave,
    lottery_scheduler,
    positional_interleave,
    scheduler_from_table,
    uniform_scheduler,
)
from .meadow import (
    MeadowValue,
    Probability,
    as_probability,
    format_rational,
    inv,
    is_probability,
    parse_rational,
    rat,
    signum,
)
from .pglb import Program, extract, extract_at, parse_program, print_program
from .services import (
    EMPTY_FAMILY,
    EMPTY_SERVICE,
    RANDOM,
    Service,
    ServiceFamily,
    check_service,
    compose,
    empty_family,
    encapsulate,
    make_random,
    make_register,
    parse_family,
    singleton,
)
from .terms import parse_term, parse_thread, print_term
from .threads import (
    Action,
    TAU,
    TDead,
    TFork,
    TPost,
    TProb,
    TRec,
    TStop,
    TVar,
    Term,
    ThreadGraph,
    action_from_name,
    basic,
    bisimilar,
    build,
    equal_up_to,
    nary_prob,
    normalize,
    project,
    tchoice,
    tprefix,
)

__version__ = "0.1.0"
