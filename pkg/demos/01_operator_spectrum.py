# Operators on truncated Hilbert spaces and the spectrum of right-multiplication.
#
# A bounded operator theta maps an input space (dim d_x) to an output space
# (dim d_y).  Composing with a fixed covariance C on the right, theta -> theta C,
# is itself a linear map on operator space.  Materialising that map as a matrix
# on column-stacked operators shows its spectrum is just the spectrum of C with
# every eigenvalue repeated d_y times: the output dimension adds multiplicity,
# never new spectral content.

import numpy as np

from oplearn import (
    apply_spectral_fn,
    hs_inner,
    outer,
    precompose_apply,
    precompose_oracle,
    schatten_norm,
)

rng = np.random.default_rng(0)

# rank-one building blocks: (y tensor x) v = <x, v> y, norm |x||y| in every order
x = rng.standard_normal(4)
y = rng.standard_normal(3)
rank_one = outer(y, x)
print("rank-one operator, Schatten norms p=1,2,inf:")
print("  ", [round(schatten_norm(rank_one, p), 6) for p in (1, 2, np.inf)])
print("   |x| |y| =", round(np.linalg.norm(x) * np.linalg.norm(y), 6))

# the trace inner product makes d_y x d_x matrices a Hilbert space
a = rng.standard_normal((3, 4))
print("trace inner product <a, a> vs squared HS norm:",
      round(hs_inner(a, a), 6), round(schatten_norm(a, 2) ** 2, 6))

# right-multiplication by a PSD covariance, and its dense representation
lam = np.array([1.0, 0.25, 0.0625])
c = np.diag(lam)
theta = rng.standard_normal((2, 3))
print("\nright-multiplication agrees with the dense oracle on vec(theta):",
      np.allclose(precompose_apply(c, theta).flatten("F"),
                  precompose_oracle(c, 2).matrix @ theta.flatten("F")))

rep = precompose_oracle(c, 2)
print("eigenvalues of C:        ", lam)
print("eigenvalues of the big map:", np.round(np.sort(np.linalg.eigvalsh(rep.matrix))[::-1], 6))

# functions of the covariance commute with the lift to operator space
g = lambda t: 1.0 / (0.1 + t)
lhs = apply_spectral_fn(rep.matrix, g)
rhs = precompose_oracle(apply_spectral_fn(c, g), 2).matrix
print("functional calculus commutes with the oracle:", np.allclose(lhs, rhs, atol=1e-12))
