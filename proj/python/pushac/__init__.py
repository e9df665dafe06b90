"""Decentralized actor-critic simulation over directed communication graphs.

The heavy lifting lives in the compiled extension; this package re-exports
the graph builders, environment generators, exact oracles, and the seeded
training loop.
"""

from pushac._core import (
    DirectedGraph,
    FeatureMap,
    NetworkedMDP,
    PushacNumericError,
    PushacValidationError,
    RunConfig,
    block_matrix,
    complete_graph,
    consensus_benchmark,
    directed_cycle,
    entrywise_push_weights,
    evaluate_policy,
    generate_features,
    generate_garnet,
    induced_chain,
    is_strongly_connected,
    metropolis_weights,
    policy_gradient,
    push_sum_weights,
    random_digraph,
    run,
    spectral_norm,
    stationary_distribution,
    td_fixed_point,
    validate_ergodicity,
)

__all__ = [
    "DirectedGraph",
    "FeatureMap",
    "NetworkedMDP",
    "PushacNumericError",
    "PushacValidationError",
    "RunConfig",
    "block_matrix",
    "complete_graph",
    "consensus_benchmark",
    "directed_cycle",
    "entrywise_push_weights",
    "evaluate_policy",
    "generate_features",
    "generate_garnet",
    "induced_chain",
    "is_strongly_connected",
    "metropolis_weights",
    "policy_gradient",
    "push_sum_weights",
    "random_digraph",
    "run",
    "spectral_norm",
    "stationary_distribution",
    "td_fixed_point",
    "validate_ergodicity",
]

__version__ = "0.1.0"
