"""The operator zoo: conjugate-function multiplier, signed Haar expansion,
and the mean-zero projection, with their adjoints and localization.

The final section measures long-range regularity: how much mass the image
of a mean-zero dipole leaks outside the dilated stopping cube.  The Haar
expansion leaks nothing (perfect dyadic localization); the multiplier
leaks a little through its kernel tails.
"""

import numpy as np

from stablab import (
    GridFunction,
    adjoint,
    apply,
    cz_decompose,
    hilbert,
    inner,
    long_range_ratio,
    norm,
    operator_norm_estimate,
)
from stablab.harness import make_operator

n = 256
x = np.arange(n) / n
H = hilbert(n)

print("multiplier identities:")
print("  H cos -> sin error:", norm(apply(H, GridFunction(np.cos(2 * np.pi * x))) - GridFunction(np.sin(2 * np.pi * x)), np.inf))
print("  H kills constants:", norm(apply(H, GridFunction.constant(5.0, n)), np.inf))

rng = np.random.default_rng(2)
f = GridFunction(rng.standard_normal(n))
g = GridFunction(rng.standard_normal(n))
for kind in ("hilbert", "haar_transform", "identity_minus_mean"):
    T = make_operator(kind, n, seed=11)
    gap = inner(apply(T, f), g) - inner(f, apply(adjoint(T), g))
    print(f"  adjoint pairing gap for {kind}: {gap:+.2e}")
    print(f"  operator norm on L^2 (power iteration): {operator_norm_estimate(T, 2):.9f}")

print()
print("long-range regularity of a dipole on [0, 1/64):")
values = np.zeros(n)
values[: n // 128] = 128.0
d = cz_decompose(GridFunction(values), 40.0)
print("  stopping cube:", [(q.level, q.index) for q in d.cubes], " omega measure:", d.omega.measure)
for kind in ("hilbert", "haar_transform", "identity_minus_mean"):
    T = make_operator(kind, n, seed=11)
    print(f"  {kind:20s} leak ratio {long_range_ratio(T, d):.6f}")
