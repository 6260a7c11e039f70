"""CN-UCB and CN-TS on a small environment, round by round.

Run: python demos/05_policies_quickstart.py
"""

import numpy as np

from combandit.environments import Environment, ScoreFunctionSpec
from combandit.network import NetworkShape
from combandit.policies import (
    CnTsPolicy,
    CnUcbPolicy,
    TrainConfig,
    TsConfig,
    UcbConfig,
    theory_sample_count,
)

D, N, K, T = 10, 8, 3, 150
shape = NetworkShape(D, 20, 2)
train_cfg = TrainConfig(train_every=10, epochs=20, batch_groups=100)

print(f"theory-prescribed optimistic sample count for K={K}: {theory_sample_count(K)}")
print(f"(practical default M=10; both policies use width m={shape.m})\n")

for name, policy in (
    ("CN-UCB", CnUcbPolicy(shape, K, UcbConfig(), train_cfg, init_seed=3,
                           rng=np.random.default_rng(4))),
    ("CN-TS ", CnTsPolicy(shape, K, TsConfig(), train_cfg, init_seed=3,
                          rng=np.random.default_rng(4))),
):
    env = Environment(
        D, N, K,
        ScoreFunctionSpec.random("h2_quadratic", D, np.random.default_rng(5)),
        noise_sd=0.05, rng=np.random.default_rng(6),
    )
    cum = 0.0
    checkpoints = {10, 50, 100, 150}
    for t in range(1, T + 1):
        X = env.new_round()
        arm = policy.select(X)
        out = env.observe_round(arm)
        cum += env.expected_regret_increment(arm)
        policy.observe(out.contexts, out.scores)
        if t in checkpoints:
            print(f"{name} t={t:3d}: cumulative expected regret = {cum:7.3f} "
                  f"(log-det ratio {policy.design.log_det_ratio():6.2f})")
    print()
