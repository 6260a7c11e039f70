"""Horizon doubling: epoch boundaries, replay, and equivalence.

Run: python demos/07_doubling.py
"""

import numpy as np

from combandit.doubling import DoublingPolicy, EpochSchedule
from combandit.environments import ScoreFunctionSpec, gen_contexts, true_scores
from combandit.network import NetworkShape
from combandit.policies import CnUcbPolicy, TrainConfig, UcbConfig

rng = np.random.default_rng(12)
spec = ScoreFunctionSpec.random("h2_quadratic", 8, rng)

train_cfg = TrainConfig(train_every=4, epochs=5, batch_groups=100)
doubled = DoublingPolicy(
    "cnucb", d=8, depth=2, k=2, explore_cfg=UcbConfig(), train_cfg=train_cfg,
    schedule=EpochSchedule(t0=8, m0=8, width_schedule="constant"),
    init_seed=5, rng=np.random.default_rng(13),
)
plain = CnUcbPolicy(NetworkShape(8, 8, 2), 2, UcbConfig(), train_cfg,
                    init_seed=5, rng=np.random.default_rng(13))

matches = 0
for t in range(1, 25):
    X = gen_contexts(8, 6, True, rng)
    scores = true_scores(spec, X)
    arm_d = doubled.select(X)
    arm_p = plain.select(X)
    matches += int(arm_d == arm_p)
    epoch_before = doubled.schedule.epoch
    doubled.observe(X[list(arm_d)], scores[list(arm_d)])
    plain.observe(X[list(arm_p)], scores[list(arm_p)])
    if doubled.schedule.epoch != epoch_before:
        print(f"t={t:2d}: epoch boundary hit -> period doubled to "
              f"{doubled.schedule.period}, history of {len(doubled.history)} "
              f"rounds replayed")

print(f"\nselections agreed with the non-doubling policy in {matches}/24 rounds "
      "(constant width + synchronized seeds makes the replay exact)")

geo = EpochSchedule(t0=4, m0=8, width_schedule="geometric", m_max=64)
widths = []
for epoch in range(6):
    geo.epoch = epoch
    widths.append(geo.width())
print("geometric width schedule over epochs:", widths)
