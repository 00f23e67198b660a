import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from varcomplex.errors import ChartSingularity, InvalidArgument, NeedsMoreSamples, TangencyViolation
from varcomplex.fields import sample_field
from varcomplex.flows import AffineMap, FlowMap, IdentityMap
from varcomplex.groups import GL, SL, Sp
from varcomplex.lagrangians import Custom, calabi_form, parse_lagrangian
from varcomplex.quadrature import Domain, _gauss_legendre
from varcomplex.verify import (
    CONSISTENT, FALSIFIED, INCONCLUSIVE, TrialRecord, calabi_component_campaign, circle_loop,
    conjecture_evidence, decide_verdict, differential_invariant_defect, fit_minors, invariance_defect,
    null_campaign, null_campaigns, rescaled_map, rescaling_limit_check, sl2_chart, sl2_chart_points, sl2_pde_residuals,
)

DOM = Domain.unit(2, 64)


def flow(g, seed, dom=DOM, amplitude=0.2):
    return FlowMap(sample_field(g, dom, amplitude, seed))


def test_invariance_examples():
    # at 64 nodes per axis the det defect is quadrature error of a few 1e-6
    r = invariance_defect(parse_lagrangian("det", 2), IdentityMap(2), flow(GL(2), 1), DOM.with_resolution(128))
    assert r.defect <= 1e-6
    r = invariance_defect(parse_lagrangian("det", 2), IdentityMap(2), flow(GL(2), 1), DOM)
    assert r.defect <= 3 * r.error
    # affine: quadrature error is ~1e-4 at 64 nodes per axis, ~1e-7 at 256
    W = parse_lagrangian("affine:1,-2,0.5,3:1", 2)
    r = invariance_defect(W, IdentityMap(2), flow(SL(2), 2), DOM.with_resolution(256))
    assert r.defect <= 1e-5
    r = invariance_defect(W, IdentityMap(2), flow(SL(2), 2), DOM)
    assert r.defect <= 3 * r.error
    r = invariance_defect(parse_lagrangian("comp11sq", 2), IdentityMap(2), flow(SL(2), 3), DOM)
    assert r.defect > 10 * r.error


def test_tangency_violation_is_reported():
    bad = AffineMap(np.diag([1.1, 1.0]), [0, 0], [0, 0], group=SL(2))
    with pytest.raises(TangencyViolation) as exc:
        invariance_defect(parse_lagrangian("det", 2), IdentityMap(2), bad, DOM)
    assert exc.value.residual > 1e-6


def test_sampled_base_maps_for_volume_preserving_flows():
    # u from general flows, phi from volume-preserving ones
    u = lambda s: flow(GL(2), s + 1000)
    rep = null_campaign(parse_lagrangian("affine:1,2,3,4:5", 2), SL(2), 6, 0, DOM, u=u)
    assert rep.verdict == CONSISTENT
    rep = null_campaign(parse_lagrangian("det", 2), SL(2), 6, 0, DOM, u=u)
    assert rep.verdict == CONSISTENT


def test_x_dependent_potential_with_homothety():
    # W = g(x) det F is invariant under volume-preserving flows only
    g = lambda x: 1 + x[..., 0] * x[..., 1] ** 2
    f = AffineMap.homothety([0.5, 0.5], [0.2, 0.3], 0.7)
    for shift in (IdentityMap(2), f):
        W = Custom(lambda x, y, F, s=shift: g(s(np.reshape(x, (-1, 2))).reshape(np.shape(x))) * np.linalg.det(F),
                   2, homogeneous=False, depends_on_x=True)
        assert null_campaign(W, SL(2), 5, 0, DOM).verdict == CONSISTENT
        assert null_campaign(W, GL(2), 5, 0, DOM).verdict == FALSIFIED


@pytest.mark.parametrize("name, expected", [("affine:1,0,0,0:2", CONSISTENT), ("comp11sq", FALSIFIED)])
def test_domain_independence(name, expected):
    W = parse_lagrangian(name, 2)
    big = DOM.scaled(1.5)
    verdicts = []
    for dom in (DOM, big):
        recs = []
        for s in range(5):
            r = invariance_defect(W, IdentityMap(2), flow(SL(2), s), dom)
            recs.append(TrialRecord(s, r.defect, r.error, r.membership))
        verdicts.append(decide_verdict(recs, 1e-5))
    assert verdicts == [expected, expected]


def test_rescaled_map_basics():
    phi = flow(SL(2), 4, dom=Domain((0.0, 0.0), (1.0, 1.0)))
    x = np.random.default_rng(0).uniform(0, 1, (100, 2))
    r = rescaled_map(phi, [0.0, 0.0], 1.0, 1)
    assert np.allclose(r(x), phi(x), atol=1e-14)
    r = rescaled_map(phi, [0.25, 0.25], 2.0, 3, dom=DOM)
    out = np.array([[0.1, 0.5], [0.8, 0.9], [0.5, 0.76]])
    assert np.array_equal(r(out), out)
    with pytest.raises(InvalidArgument):
        rescaled_map(phi, [0.5, 0.5], 1.0, 2, dom=DOM)


def test_rescaled_jacobian():
    phi = flow(SL(2), 4, dom=Domain((0.25, 0.25), (1.25, 1.25)))
    r = rescaled_map(phi, [0.25, 0.25], 2.0, 3, dom=DOM)
    x = np.random.default_rng(1).uniform(0.26, 0.74, (50, 2))
    s = 6.0 * (x - 0.25)
    arg = 0.25 + s - np.floor(s)
    assert np.max(np.abs(r.jacobian(x) - phi.jacobian(arg))) <= 1e-10
    h = 1e-6
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        fd = (r(x + e) - r(x - e)) / (2 * h)
        ok = np.all(np.floor(6 * (x + e - 0.25)) == np.floor(6 * (x - e - 0.25)), axis=1)
        assert np.max(np.abs(r.jacobian(x)[ok][:, :, k] - fd[ok])) <= 1e-7


def test_rescaling_limit_examples():
    dom = Domain.unit(2, 32)
    Q1 = Domain((0.25, 0.25), (1.25, 1.25), 32)
    phi = flow(SL(2), 6, dom=Q1)
    t = rescaling_limit_check(parse_lagrangian("det", 2), IdentityMap(2), phi, 2.0, [1, 2, 4], dom)
    assert all(r.defect <= max(2 * r.error, 1e-12) for r in t.rows)
    t = rescaling_limit_check(parse_lagrangian("frob2", 2), IdentityMap(2), IdentityMap(2), 2.0, [1, 2], dom)
    assert all(r.defect <= 1e-14 for r in t.rows)
    # with a generic psi the two sides differ by quadrature error only
    t = rescaling_limit_check(parse_lagrangian("frob2", 2), flow(GL(2), 7, dom), IdentityMap(2), 2.0, [1, 2], dom)
    assert all(r.defect <= r.error for r in t.rows)
    csv = t.to_csv().splitlines()
    assert csv[0] == "k,integral,target,defect,est_order" and len(csv) == 3
    with pytest.raises(InvalidArgument):
        rescaling_limit_check(parse_lagrangian("det", 2), IdentityMap(2), phi, 2.0, [2, 1], dom)


def test_rescaling_budget_flags_rows():
    dom = Domain.unit(2, 32)
    phi = flow(SL(2), 6, dom=Domain((0.25, 0.25), (1.25, 1.25), 32))
    t = rescaling_limit_check(parse_lagrangian("frob2", 2), IdentityMap(2), phi, 2.0, [1, 64], dom,
                              max_nodes=100_000)
    assert not t.rows[0].flagged and t.rows[1].flagged and np.isnan(t.rows[1].defect)


def test_sl2_chart_and_residuals():
    F = sl2_chart(1.7, -0.3, 0.4)
    assert np.linalg.det(F) == pytest.approx(1.0)
    pts = sl2_chart_points(20, 3)
    assert np.all(np.abs(pts[:, 0]) >= 0.5)
    W = parse_lagrangian("affine:1,-2,0.5,3:1", 2)
    for p in pts:
        assert np.max(np.abs(sl2_pde_residuals(W, *p))) <= 1e-6
    r = sl2_pde_residuals(parse_lagrangian("comp11sq", 2), 1.0, 0.3, -0.2)
    assert r[0] == pytest.approx(2.0, abs=1e-6)
    assert np.max(np.abs(r[1:])) <= 1e-6
    assert np.all(sl2_pde_residuals(parse_lagrangian("const:3", 2), 0.8, 0.1, 0.2) == 0)
    with pytest.raises(ChartSingularity):
        sl2_pde_residuals(W, 1e-8, 0.0, 0.0)


def test_differential_invariant_identity_and_symplectic():
    alpha = calabi_form()
    loop = circle_loop([0.5, 0.5], 0.1)
    assert differential_invariant_defect(alpha, IdentityMap(2), loop).value == 0.0
    for s in range(5):
        phi = flow(Sp(2), s, amplitude=0.5)
        assert differential_invariant_defect(alpha, phi, circle_loop(phi.field.center, 0.1), DOM).value <= 1e-6
    with pytest.raises(InvalidArgument):
        differential_invariant_defect(alpha, IdentityMap(2), circle_loop([0.95, 0.5], 0.1), DOM)


def _disk_integral(f, center, radius, n=64):
    # polar Gauss-Legendre: int_0^R int_0^2pi f r dtheta dr
    xr, wr = _gauss_legendre(n)
    r = radius * xr
    th = 2 * np.pi * np.arange(4 * n) / (4 * n)
    R, T = np.meshgrid(r, th, indexing="ij")
    pts = np.asarray(center) + np.stack([R * np.cos(T), R * np.sin(T)], -1).reshape(-1, 2)
    w = (radius * wr[:, None] * r[:, None] * (2 * np.pi / (4 * n)) * np.ones_like(T)).ravel()
    return float(np.sum(f(pts) * w))


def test_differential_invariant_matches_stokes():
    # loop integral of phi*(y dx) - y dx = -int_disk (det grad phi - 1)
    for s in range(3):
        phi = flow(GL(2), s, amplitude=0.5)
        c = phi.field.center
        # the polygon encloses slightly less than the disk: relative gap ~ (2 pi / vertices)^2 / 6
        est = differential_invariant_defect(calabi_form(), phi, circle_loop(c, 0.1, 4096), DOM, samples=8192)
        area = _disk_integral(lambda x: np.linalg.det(phi.jacobian(x)) - 1, c, 0.1)
        assert est.value == pytest.approx(abs(area), rel=1e-5)
        assert est.value > 10 * est.error


def test_calabi_small_amplitude():
    small = calabi_component_campaign(dom=DOM, trials=3, amplitude=1e-6)
    larger = calabi_component_campaign(dom=DOM, trials=3, amplitude=1e-3)
    worst = lambda rep: max(t.defect for t in rep.trials)
    assert worst(small) <= 1e-6
    assert worst(small) <= 2e-3 * worst(larger)
    with pytest.raises(InvalidArgument):
        calabi_component_campaign(v=(0, 0))


def test_conjecture_evidence_examples():
    rep = conjecture_evidence(parse_lagrangian("affine:1,-2,0.5,3:1", 2), SL(2), 4, 0, DOM)
    assert rep.label == "EVIDENCE" and rep.verdict == CONSISTENT
    assert rep.extra["fit_residual"] <= 1e-9
    rep = conjecture_evidence(parse_lagrangian("det", 2), SL(2), 4, 0, DOM)
    assert rep.extra["fit_residual"] <= 1e-12
    rep = conjecture_evidence(parse_lagrangian("comp11sq", 2), SL(2), 4, 0, DOM)
    assert rep.verdict == FALSIFIED and rep.extra["fit"] == "skipped"
    with pytest.raises(NeedsMoreSamples):
        fit_minors(parse_lagrangian("det", 3), np.tile(np.eye(3), (5, 1, 1)))


def test_report_json_is_deterministic():
    W = parse_lagrangian("comp11sq", 2)
    a = null_campaign(W, SL(2), 2, 0, DOM).to_json()
    b = null_campaign(W, SL(2), 2, 0, DOM).to_json()
    assert a == b
    assert '"verdict": "falsified-null"' in a


records = st.lists(
    st.builds(TrialRecord, st.integers(0, 100), st.floats(0, 1e-2), st.floats(0, 1e-3), st.just(0.0)),
    min_size=1, max_size=20,
)


@given(records, st.floats(1e-8, 1e-3))
def test_verdict_rule_invariants(recs, tol):
    v = decide_verdict(recs, tol)
    if v == FALSIFIED:
        assert any(r.defect > 10 * r.error for r in recs)
    if v == CONSISTENT:
        assert all(r.defect <= max(tol, 3 * r.error) for r in recs)
    assert v in (CONSISTENT, FALSIFIED, INCONCLUSIVE)


def test_affine_sl2_campaign_resolves_at_128():
    # at 64 nodes per axis a few strongly nonlinear flows are still
    # pre-asymptotic; one doubling makes every seeded trial consistent
    rng = np.random.default_rng(0)
    Ws = [parse_lagrangian("affine:" + ",".join(repr(float(v)) for v in rng.uniform(-2, 2, 4)) + ":0.5", 2)
          for _ in range(3)]
    for rep in null_campaigns(Ws, SL(2), 20, 0, Domain.unit(2, 128)):
        assert all(t.consistent(1e-5) for t in rep.trials), rep.lagrangian
