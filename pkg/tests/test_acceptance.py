"""One test per acceptance criterion, each at its stated tolerance and time
budget.  Every test prints a single PASS/FAIL line (also collected into the
terminal summary)."""

import time

import numpy as np

from conftest import ACCEPTANCE_LINES
from varcomplex.calculus import EL_pairing, d_squared_residual, legendre_hadamard, rank_one_linearity_defect
from varcomplex.fields import sample_field
from varcomplex.flows import FlowMap, IdentityMap
from varcomplex.groups import GL, SL, Sp, random_elements, residual
from varcomplex.lagrangians import (
    Custom, Minors, calabi_potential, det_weighted_affine, parse_lagrangian,
)
from varcomplex.quadrature import Domain
from varcomplex.verify import (
    CONSISTENT, FALSIFIED, all_minor_keys, calabi_component_campaign, null_campaigns,
    rescaling_limit_check, sl2_chart_points, sl2_pde_residuals,
)


def record(number, title, ok, detail, elapsed, budget):
    ok = bool(ok) and elapsed < budget
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d} {title}: {detail} [{elapsed:.1f} s / {budget:g} s]"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def seeded_affines(count, n=2, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        a = rng.uniform(-2, 2, n * n)
        out.append(parse_lagrangian("affine:" + ",".join(repr(float(v)) for v in a) + f":{rng.uniform(-1, 1)!r}", n))
    return out


def test_criterion_01_d_complex():
    t0 = time.perf_counter()
    family = {
        "constant": parse_lagrangian("const:1.7", 2),
        "component": parse_lagrangian("comp:12", 2),
        "affine": parse_lagrangian("affine:1,-2,0.5,3:1", 2),
        "det": parse_lagrangian("det", 2),
        "2x2 minors n=3": Minors({"12|12": 1.0, "13|23": -2.0, "23|12": 0.5}, 3),
        "|F|^2": parse_lagrangian("frob2", 2),
        "calabi": calabi_potential(),
    }
    worst = {k: d_squared_residual(W, 50, 0) for k, W in family.items()}
    elapsed = time.perf_counter() - t0
    top = max(worst, key=worst.get)
    record(1, "D^2 = 0", max(worst.values()) <= 1e-6,
           f"max residual {worst[top]:.2e} ({top}) <= 1e-6 over {len(family)} families", elapsed, 10)


def test_criterion_02_null_invariance():
    t0 = time.perf_counter()
    cases = [
        (GL(2), [parse_lagrangian(s, 2) for s in ("det", "comp:11", "comp:21", "const:1")]
         + [Minors({"det": 2.0, "12": -1.0, "1": 0.5}, 2)]),
        (GL(3), [parse_lagrangian(s, 3) for s in ("det", "comp:12", "minor:12|23", "minor:13|13")]
         + [Minors({"det": 1.0, "12|12": 2.0, "31": -1.0}, 3)]),
        (SL(2), seeded_affines(3) + [parse_lagrangian("affine:1,0,0,0:2", 2)]),
    ]
    bad, count, ratio = [], 0, 0.0
    for g, Ws in cases:
        for rep in null_campaigns(Ws, g, 20, 0, Domain.unit(g.n, 64)):
            for t in rep.trials:
                count += 1
                ratio = max(ratio, t.defect / max(1e-5, 3 * t.error))
                if not t.consistent(1e-5):
                    bad.append((str(g), rep.lagrangian, t.seed))
    elapsed = time.perf_counter() - t0
    record(2, "null invariance", not bad,
           f"{count - len(bad)}/{count} trials within max(1e-5, 3 err), worst ratio {ratio:.2f}"
           + "".join(f"; outside: {l[:24]} on {g} seed {s}" for g, l, s in bad), elapsed, 120)


def test_criterion_03_falsification():
    t0 = time.perf_counter()
    counts = {}
    for g, name in ((SL(2), "comp11sq"), (GL(2), "frob2")):
        rep = null_campaigns([parse_lagrangian(name, 2)], g, 20, 0, Domain.unit(2, 64))[0]
        counts[f"{name} on {g}"] = sum(t.defect > 10 * t.error for t in rep.trials)
    elapsed = time.perf_counter() - t0
    record(3, "falsification", all(c >= 18 for c in counts.values()),
           ", ".join(f"{k}: {c}/20 falsified" for k, c in counts.items()), elapsed, 120)


def test_criterion_04_sl2_classification():
    t0 = time.perf_counter()
    pts = sl2_chart_points(100, 0)
    worst = 0.0
    for W in seeded_affines(3, seed=1):
        for p in pts:
            worst = max(worst, float(np.max(np.abs(sl2_pde_residuals(W, *p)))))
    r5 = [sl2_pde_residuals(parse_lagrangian("comp11sq", 2), 1.0, y, z)[0] for y, z in ((0.0, 0.0), (0.5, -0.3))]
    elapsed = time.perf_counter() - t0
    record(4, "SL2 chart system", worst <= 1e-6 and min(abs(v) for v in r5) >= 1,
           f"affine max residual {worst:.2e} <= 1e-6 at 100 points; F11^2 |r5| at X=1: {min(map(abs, r5)):.6f} >= 1",
           elapsed, 5)


def test_criterion_05_legendre_hadamard():
    t0 = time.perf_counter()
    worst = 0.0
    frob_err = 0.0
    for n in (2, 3):
        rng = np.random.default_rng(n)
        F = random_elements(GL(n), 50, 0.5, rng)
        a, b = rng.normal(size=(2, 50, n))
        minors = [Minors({(tuple(i + 1 for i in r), tuple(i + 1 for i in c)): 1.0}, n) for r, c in all_minor_keys(n)]
        minors.append(Minors({k: v for k, v in zip(["det", "12", "21"], rng.normal(size=3))}, n))
        for W in minors:
            for i in range(50):
                worst = max(worst, abs(legendre_hadamard(W, F[i], a[i], b[i])))
        frob = parse_lagrangian("frob2", n)
        for i in range(50):
            expected = 2 * (a[i] @ a[i]) * (b[i] @ b[i])
            frob_err = max(frob_err, abs(legendre_hadamard(frob, F[i], a[i], b[i]) - expected))
    elapsed = time.perf_counter() - t0
    record(5, "Legendre-Hadamard", worst <= 1e-7 and frob_err <= 1e-7,
           f"minors max |LH| {worst:.2e} <= 1e-7; |F|^2 deviation from 2|a|^2|b|^2 {frob_err:.2e}", elapsed, 5)


def test_criterion_06_rank_one():
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    F = random_elements(SL(2), 50, 0.5, rng)
    worst = 0.0
    for i, W in enumerate(seeded_affines(50, seed=6)):
        a = rng.normal(size=2)
        b = rng.normal() * np.array([-a[1], a[0]])
        worst = max(worst, rank_one_linearity_defect(W, F[i], a, b, group=SL(2)))
    frob = rank_one_linearity_defect(parse_lagrangian("frob2", 2), np.eye(2), [1.0, 0.0], [0.0, 1.0])
    elapsed = time.perf_counter() - t0
    record(6, "rank-one lines", worst <= 1e-10 and frob >= 0.1,
           f"affine max defect {worst:.2e} <= 1e-10; |F|^2 defect {frob:.5f} >= 0.1", elapsed, 2)


def test_criterion_07_rescaling_limit():
    t0 = time.perf_counter()
    dom = Domain.unit(2, 32)
    x1 = np.array([0.25, 0.25])
    Q1 = Domain(tuple(x1), tuple(x1 + 1), 32)
    ks = [1, 2, 4, 8]
    psi = FlowMap(sample_field(GL(2), dom, 0.2, 100))
    phi = FlowMap(sample_field(GL(2), Q1, 0.2, 101))
    frob = rescaling_limit_check(parse_lagrangian("frob2", 2), psi, phi, 2.0, ks, dom, x1=x1)
    rows = frob.rows
    monotone = all(b.defect <= a.defect + max(a.error, b.error) for a, b in zip(rows, rows[1:]))
    det = rescaling_limit_check(parse_lagrangian("det", 2), IdentityMap(2),
                                FlowMap(sample_field(SL(2), Q1, 0.2, 102)), 2.0, ks, dom, x1=x1)
    det_ok = all(r.defect <= 2 * r.error for r in det.rows)
    elapsed = time.perf_counter() - t0
    record(7, "rescaling limit", monotone and det_ok and rows[-1].defect <= rows[0].defect,
           "|F|^2 defects " + ", ".join(f"{r.defect:.2e}" for r in rows)
           + "; det defect/error " + ", ".join(f"{r.defect:.1e}/{r.error:.1e}" for r in det.rows), elapsed, 300)


def test_criterion_08_flow_constraints():
    t0 = time.perf_counter()
    worst = {}
    times = np.linspace(0, 1, 11)
    for g in (SL(2), SL(3), Sp(2), Sp(4)):
        dom = Domain.unit(g.n)
        probes = np.concatenate([dom.with_resolution(16 if g.n == 2 else 8).nodes()[0],
                                 np.random.default_rng(8).uniform(0, 1, (500, g.n))])
        w = 0.0
        for seed in range(3):
            field = sample_field(g, dom, 0.2, seed)
            for t in times:
                J = FlowMap(field, t).jacobian(probes)
                if g.tag.value == "sl":
                    w = max(w, float(np.max(np.abs(np.linalg.det(J) - 1))))
                else:
                    om = g.omega
                    w = max(w, float(np.max(np.linalg.norm(J @ om @ np.swapaxes(J, 1, 2) - om, axis=(1, 2)))))
        worst[str(g)] = w
    elapsed = time.perf_counter() - t0
    record(8, "flow constraints", max(worst.values()) <= 1e-8,
           ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + " <= 1e-8", elapsed, 30)


def test_criterion_09_calabi():
    t0 = time.perf_counter()
    rep = calabi_component_campaign((1.0, 0.0), Domain.unit(2, 64), trials=20, seed=0)
    sp, gl = rep.sections["sp:2"], rep.sections["gl:2"]
    elapsed = time.perf_counter() - t0
    record(9, "Calabi campaign", sp.verdict == CONSISTENT and gl.verdict == FALSIFIED,
           f"sp:2 {sp.verdict}, gl:2 {gl.verdict} ({gl.falsified_count}/20 falsified)", elapsed, 60)


def test_criterion_10_euler_lagrange():
    t0 = time.perf_counter()
    dom = Domain.unit(2, 64)
    Ws = [
        parse_lagrangian("det", 2), parse_lagrangian("comp:12", 2), parse_lagrangian("affine:1,2,3,4:5", 2),
        parse_lagrangian("frob2", 2), parse_lagrangian("comp11sq", 2), calabi_potential(),
        det_weighted_affine(lambda d: d * np.eye(2), lambda d: np.sin(d)),
        Custom(lambda x, y, F: (1 + x[..., 0] ** 2) * np.einsum("...ij,...ij->...", F, F), 2,
               homogeneous=False, depends_on_x=True),
    ]
    bad, worst, nonnull = [], 0.0, 0
    for s in range(20):
        W = Ws[s % len(Ws)]
        u = FlowMap(sample_field(GL(2), dom, 0.2, 500 + s))
        eta = sample_field(GL(2) if s % 2 else SL(2), dom, 0.2, 600 + s)
        p = EL_pairing(W, u, eta, dom)
        worst = max(worst, p.discrepancy / max(1e-5, 3 * p.combined_error))
        nonnull += abs(p.eula) > 10 * p.eula_error
        if not p.agrees(1e-5, 3.0):
            bad.append((W.name, s))
    elapsed = time.perf_counter() - t0
    record(10, "Euler-Lagrange consistency", not bad and nonnull > 0,
           f"{20 - len(bad)}/20 triples agree, worst ratio {worst:.2f}, {nonnull} with nonzero pairing",
           elapsed, 120)
