# Null lagrangians leave the variational integral unchanged
#
# A potential W is null when I_W(u o phi) = I_W(u) for every compactly
# supported map phi in the local group.  Here we draw seeded flows and watch
# the defect for a null and a non-null potential side by side.

# %%

from varcomplex import Domain, GL, SL, null_campaigns, parse_lagrangian

dom = Domain.unit(2, 64)

# %% [markdown]
# On GL2 the determinant is null; |F|^2 is not.  One flow per trial is shared
# by both potentials, so the comparison is on identical maps.

# %%

det, frob = parse_lagrangian("det", 2), parse_lagrangian("frob2", 2)
for rep in null_campaigns([det, frob], GL(2), trials=5, seed=0, dom=dom):
    print(f"{rep.lagrangian:>6}  verdict: {rep.verdict}")
    for t in rep.trials:
        print(f"    seed {t.seed}: defect {t.defect:.2e}  error {t.error:.2e}")

# %% [markdown]
# Restricting to volume preserving flows enlarges the null class: any
# potential affine in F becomes null on SL2, while F11^2 still is not.

# %%

aff = parse_lagrangian("affine:1,-2,0.5,3:1", 2)
sq = parse_lagrangian("comp11sq", 2)
for rep in null_campaigns([aff, sq], SL(2), trials=5, seed=0, dom=dom):
    print(f"{rep.lagrangian:>24}  verdict: {rep.verdict}")
