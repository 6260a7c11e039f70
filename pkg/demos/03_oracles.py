"""Combinatorial oracles: top-K selection, assignments, alpha approximation.

Run: python demos/03_oracles.py
"""

import itertools

import numpy as np

from combandit.oracles import alpha_wrap, assignment_oracle, top_k

rng = np.random.default_rng(2)

scores = np.array([0.9, 0.1, 0.8, 0.2, 0.5])
print("scores:", scores, "-> top-2 super arm:", top_k(scores, 2))
print("uniform shift leaves the choice alone:", top_k(scores + 3.7, 2))

# exhaustive cross-check on a random instance
s = rng.standard_normal(7)
best = max(itertools.combinations(range(7), 3), key=lambda c: sum(s[i] for i in c))
print("exhaustive argmax:", best, "| top_k:", top_k(s, 3))

# an alpha-approximate oracle degrades gracefully
half = alpha_wrap(top_k, 0.5)
nonneg = rng.uniform(0, 1, 8)
chosen = half(nonneg, 4)
optimum = sum(sorted(nonneg)[-4:])
print(f"alpha=0.5 greedy achieves {sum(nonneg[list(chosen)]):.3f} "
      f">= 0.5 x optimum = {0.5 * optimum:.3f}")

# one-arm-per-position assignment (position-based ranking)
matrix = rng.uniform(0, 1, (5, 3))
assignment = assignment_oracle(matrix)
value = sum(matrix[arm, pos] for arm, pos in assignment)
brute = max(
    (sum(matrix[perm[pos], pos] for pos in range(3)), perm)
    for perm in itertools.permutations(range(5), 3)
)
print(f"assignment {assignment} value={value:.4f} | brute-force value={brute[0]:.4f}")
