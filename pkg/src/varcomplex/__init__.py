"""Numerical toolkit for null lagrangians of first-order variational
integrals under local matrix groups.

The modules build on each other: :mod:`groups` (GL, SL, Sp, conformal),
:mod:`fields` (compactly supported generators), :mod:`flows` (RK4 flows with
exact Jacobians), :mod:`quadrature` (Gauss-Legendre boxes),
:mod:`lagrangians` (potentials and their derivatives), :mod:`calculus`
(the derivation ``D``, Euler-Lagrange and second-order tests) and
:mod:`verify` (campaigns with verdicts).  :mod:`cli` drives them.
"""

from .calculus import (
    D0, D0_form, D1, D1_form, EL_pairing, ELPairing, classical_EL, d_squared_residual,
    legendre_hadamard, rank_one_linearity_defect, second_variation_residual,
)
from .errors import (
    ChartSingularity, DomainError, IntegrandError, IntegrationBudgetExceeded, InvalidArgument,
    NeedsMoreSamples, TangencyViolation, UnsupportedConfiguration, VarComplexError,
)
from .fields import CompactField, sample_field
from .flows import AffineMap, ComposedMap, FlowMap, IdentityMap, compose, conjugate
from .groups import GL, SL, Conformal, GroupSpec, Sp, member, residual
from .lagrangians import (
    Affine, AlgebraForm, Constant, Custom, DetWeightedAffine, DifferentialForm, Lagrangian, Minors,
    Pullback, Quadratic, calabi_form, calabi_potential, det_weighted_affine, minors_lagrangian,
    parse_lagrangian, pullback_potential,
)
from .quadrature import Domain, Estimate, integrate, integrate_with_error
from .verify import (
    CONSISTENT, FALSIFIED, INCONCLUSIVE, CampaignReport, calabi_component_campaign, conjecture_evidence,
    differential_invariant_defect, invariance_defect, null_campaign, null_campaigns, rescaled_map,
    rescaling_limit_check, sl2_pde_residuals,
)

__version__ = "0.1.0"
