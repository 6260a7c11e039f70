"""Combinatorial neural bandit simulation toolkit.

Implements the CN-UCB and CN-TS policies with a from-scratch ReLU score
network, linear combinatorial baselines (CombLinUCB / CombLinTS), exact and
approximate super-arm oracles, synthetic semi-bandit environments with
document / position-based / cascade feedback, NTK diagnostics, horizon
doubling variants, and a reproducible regret-benchmark harness.
"""

from combandit.errors import ConfigurationError, ContractError, DataError

__all__ = ["ConfigurationError", "ContractError", "DataError"]

__version__ = "0.1.0"
