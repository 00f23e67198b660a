# Pointwise tests of nullity
#
# Integral invariance is expensive.  Null lagrangians also satisfy cheap
# algebraic conditions at single matrices: the Legendre-Hadamard equality,
# linearity along rank-one lines, and, for SL2, a small PDE system in a chart.

# %%

import numpy as np

from varcomplex import (
    GL, SL, legendre_hadamard, parse_lagrangian, rank_one_linearity_defect,
    sl2_pde_residuals,
)
from varcomplex.groups import random_elements

rng = np.random.default_rng(1)
F = random_elements(GL(3), 1, 0.5, rng)[0]
a, b = rng.normal(size=(2, 3))

# %% [markdown]
# Second derivatives contracted with a (x) b twice vanish for minors, but give
# 2|a|^2|b|^2 for the squared norm.

# %%

for name in ("det", "minor:12|23", "frob2"):
    print(f"{name:>12}: LH = {legendre_hadamard(parse_lagrangian(name, 3), F, a, b):+.3e}")
print(f"{'expected':>12}: 2|a|^2|b|^2 = {2 * (a @ a) * (b @ b):.3e}")

# %% [markdown]
# On SL2, t -> W(F(I + t a (x) b)) with a.b = 0 is linear for affine W.

# %%

G = random_elements(SL(2), 1, 0.5, rng)[0]
aff = parse_lagrangian("affine:1,2,3,4:0", 2)
print("affine rank-one defect:", rank_one_linearity_defect(aff, G, [1.0, 2.0], [-2.0, 1.0], group=SL(2)))
print("frob2  rank-one defect:", rank_one_linearity_defect(parse_lagrangian("frob2", 2), np.eye(2), [1, 0], [0, 1]))

# %% [markdown]
# In the chart F = [[X, Y], [Z, (1 + YZ)/X]] the affine family solves all
# five equations; F11^2 violates the first.

# %%

print("affine  :", np.round(sl2_pde_residuals(aff, 1.3, 0.2, -0.4), 8))
print("F11^2   :", np.round(sl2_pde_residuals(parse_lagrangian("comp11sq", 2), 1.0, 0.0, 0.0), 8))
