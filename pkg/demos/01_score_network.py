"""Score network walkthrough: symmetric init, forward pass, gradients.

Run: python demos/01_score_network.py
"""

import numpy as np

from combandit.network import (
    NetworkParams,
    NetworkShape,
    forward,
    gradient,
    gradient_many,
    init_params,
)

rng = np.random.default_rng(0)

# a width-8 depth-2 network on 6-dim contexts
shape = NetworkShape(d=6, m=8, L=2)
params = init_params(shape, seed=42)
print(f"shape d={shape.d} m={shape.m} L={shape.L} -> p={shape.p} parameters")

W1, WL = params.weights()
print("hidden layer is block diagonal:", np.all(W1[:4, 3:] == 0), np.all(W1[4:, :3] == 0))
print("output layer is antisymmetric:", np.allclose(WL[0, 4:], -WL[0, :4]))

# paired contexts (both halves equal) evaluate to exactly zero at init
z = rng.standard_normal(3)
z /= np.linalg.norm(z)
x = np.concatenate([z, z]) / np.sqrt(2.0)
print(f"f(paired x; theta_0) = {forward(shape, params, x):.2e}  (init-zero)")

# gradients match central finite differences
params.theta[:] += rng.normal(0, 0.1, shape.p)  # move off the symmetric point
g = gradient(shape, params, x)
step = 1e-5
fd = np.zeros(shape.p)
for j in range(shape.p):
    up, dn = params.theta.copy(), params.theta.copy()
    up[j] += step
    dn[j] -= step
    fd[j] = (forward(shape, NetworkParams(shape, up), x)
             - forward(shape, NetworkParams(shape, dn), x)) / (2 * step)
print(f"max |backprop - finite difference| = {np.abs(g - fd).max():.2e}")

# gradient norms scale like sqrt(m * L)
for m in (16, 64, 256):
    s = NetworkShape(6, m, 2)
    p0 = init_params(s, 1)
    Z = rng.standard_normal((50, 3))
    Z /= np.linalg.norm(Z, axis=1, keepdims=True)
    X = np.concatenate([Z, Z], axis=1) / np.sqrt(2.0)
    norms = np.linalg.norm(gradient_many(s, p0, X), axis=1)
    print(f"m={m:4d}: ||g|| / sqrt(mL) in [{(norms / np.sqrt(m * 2)).min():.2f}, "
          f"{(norms / np.sqrt(m * 2)).max():.2f}]")
