"""Environments: score functions, noise, and the four feedback models.

Run: python demos/04_environments.py
"""

import numpy as np

from combandit.environments import (
    Environment,
    FeedbackModel,
    ScoreFunctionSpec,
    gen_contexts,
    true_scores,
)

rng = np.random.default_rng(3)

X = gen_contexts(d=6, n_arms=4, pairing=True, rng=rng)
print("paired contexts: halves equal ->", np.allclose(X[:, :3], X[:, 3:]))

for kind in ("h1_linear", "h2_quadratic", "h3_cosine"):
    spec = ScoreFunctionSpec.random(kind, 6, np.random.default_rng(7))
    h = true_scores(spec, X)
    print(f"{kind:13s} scores: {np.round(h, 3)}")

spec = ScoreFunctionSpec.random("h2_quadratic", 6, np.random.default_rng(7))

print("\nsemi-bandit round (all chosen scores observed):")
env = Environment(6, 5, 3, spec, noise_sd=0.05, rng=np.random.default_rng(8))
env.new_round()
out = env.observe_round((0, 2, 4))
print("  arms:", out.arms, "scores:", np.round(out.scores, 3), "F_t =", out.f_count)
print("  regret increment:", round(env.expected_regret_increment((0, 2, 4)), 4))

print("\ncascade round (user stops at the first click):")
env = Environment(
    6, 5, 3, spec, noise_sd=0.05,
    feedback=FeedbackModel("cascade", psi=np.array([1.0, 0.8, 0.6])),
    rng=np.random.default_rng(9),
)
env.new_round()
counts = []
for _ in range(300):
    counts.append(env.observe_round((0, 1, 2)).f_count)
print("  observed-prefix length distribution:",
      {k: counts.count(k) for k in sorted(set(counts))})

print("\nposition-based round (arm score scaled by slot quality):")
env = Environment(
    6, 5, 3, spec, noise_sd=0.0,
    feedback=FeedbackModel("position_based", chi=np.array([1.0, 0.6, 0.3])),
    rng=np.random.default_rng(10),
)
env.new_round()
out = env.observe_round(((0, 0), (1, 1), (2, 2)))
print("  assignment scores:", np.round(out.scores, 3))
print("  optimal assignment:", env.optimal_selection())
