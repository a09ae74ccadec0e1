"""Sequential-measurement hidden-variable model for the Mermin-Peres square."""

from __future__ import annotations

from .contexts import (
    Context,
    ValueTable,
    capital_g,
    capital_phi,
    check_decomposition,
    ks_exhaustive_check,
    microstate_membership,
    set_membership,
    value_table,
)
from .expsuite import (
    EXPERIMENTS,
    PAPER_MICROSTATE,
    analyze_cabello,
    analyze_hasegawa,
    analyze_huang,
    replay_experiment,
)
from .harness import (
    EmpiricalDistribution,
    RunConfig,
    monte_carlo,
    oracle_distribution,
    tv_distance,
    verify_corollary,
    verify_cup,
    verify_marginals,
    verify_theorem1,
)
from .hvmodel import DigitCode, Ensemble, Microstate, chi, decode, macrostate_g, nu, phi, run_sequential
from .qcore import (
    Observable,
    QuantumState,
    ZeroProbabilityHistory,
    born_prob,
    joint_prob,
    luders_update,
    magic_square_operator,
    named_state,
    verify_square_algebra,
)

__version__ = "0.1.0"

__all__ = [
    "analyze_cabello",
    "analyze_hasegawa",
    "analyze_huang",
    "born_prob",
    "capital_g",
    "capital_phi",
    "check_decomposition",
    "chi",
    "Context",
    "decode",
    "DigitCode",
    "EmpiricalDistribution",
    "Ensemble",
    "EXPERIMENTS",
    "joint_prob",
    "ks_exhaustive_check",
    "luders_update",
    "macrostate_g",
    "magic_square_operator",
    "Microstate",
    "microstate_membership",
    "monte_carlo",
    "named_state",
    "nu",
    "Observable",
    "oracle_distribution",
    "PAPER_MICROSTATE",
    "phi",
    "QuantumState",
    "replay_experiment",
    "run_sequential",
    "RunConfig",
    "set_membership",
    "tv_distance",
    "value_table",
    "ValueTable",
    "verify_corollary",
    "verify_cup",
    "verify_marginals",
    "verify_square_algebra",
    "verify_theorem1",
    "ZeroProbabilityHistory",
]
