"""Command-line driver for the verification campaigns.

Each subcommand writes a JSON report (sorted keys, no timestamps) to
``--out`` or to standard output; ``rescale-limit`` also writes its
convergence table as CSV next to the JSON file.  Exit status is 0 when every
outcome matches its expectation, 1 when one does not and 2 on usage errors.

Expectations: ``--expect null`` asks for the check to pass (nullity or the
identity holds), ``--expect falsified`` for it to fail, and ``--expect auto``
(the default) takes the answer from the known status of the named
lagrangian on the chosen group.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import calculus, verify
from .errors import InvalidArgument, UnsupportedConfiguration, VarComplexError
from .fields import sample_field
from .flows import FlowMap
from .groups import GL, GroupSpec, Tag, random_elements
from .lagrangians import parse_lagrangian
from .quadrature import Domain

COMMANDS = (
    "verify-null", "d-complex", "el-check", "legendre-hadamard", "rank-one",
    "sl2-classify", "rescale-limit", "calabi", "conjecture-evidence", "all",
)

TOLERANCES = {
    "campaign": verify.DEFAULT_TOL,
    "d_complex": 1e-6,
    "legendre": 1e-7,
    "rank_one": 1e-10,
    "sl2": 1e-6,
    "el_floor": 1e-5,
    "fit": 1e-9,
    "rescale_floor": 1e-10,
}

DEFAULTS = {
    "verify-null": ("sl:2", "affine:1,0,0,0:2"),
    "d-complex": ("gl:2", "det"),
    "el-check": ("gl:2", "frob2"),
    "legendre-hadamard": ("gl:3", "minor:12|23"),
    "rank-one": ("sl:2", "affine:1,2,3,4:1"),
    "sl2-classify": ("sl:2", "affine:1,2,3,4:1"),
    "rescale-limit": ("gl:2", "frob2"),
    "calabi": ("sp:2", "calabi"),
    "conjecture-evidence": ("sl:2", "affine:1,2,3,4:1"),
}

# lagrangians that are combinations of minors: null on every group
_MINOR_HEADS = {"det", "minor", "affine", "comp", "const"}
# seeds of the base maps u are offset so they never coincide with the flows
U_SEED_OFFSET = 10_000


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Everything that determines a run; ``to_dict``/``from_dict`` round-trip."""

    command: str
    group: str
    lagrangian: str
    lower: list
    upper: list
    resolution: int = 64
    trials: int = 20
    seed: int = 0
    amplitude: float = verify.DEFAULT_AMPLITUDE
    samples: int = 50
    expect: str = "auto"
    k_list: list = field(default_factory=lambda: [1, 2, 4, 8])
    h: float | None = None
    tolerances: dict = field(default_factory=lambda: dict(TOLERANCES))
    out: str | None = None

    def to_dict(self, with_out=True):
        d = asdict(self)
        if not with_out:
            d.pop("out")
        return d

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        cfg.tolerances = {**TOLERANCES, **cfg.tolerances}
        return cfg

    @property
    def group_spec(self) -> GroupSpec:
        return GroupSpec.parse(self.group)

    def domain(self, resolution=None) -> Domain:
        return Domain(tuple(self.lower), tuple(self.upper), resolution or self.resolution)

    def tol(self, key):
        return float(self.tolerances[key])


# --------------------------------------------------------------------------
# argument handling


def parse_domain(text, n):
    """``"lo..hi"`` with scalar or comma-separated bounds, broadcast to ``n`` axes."""
    lo_txt, sep, hi_txt = text.partition("..")
    if not sep:
        raise UsageError(f"--domain must look like lo..hi, got {text!r}")

    def side(t):
        try:
            v = [float(s) for s in t.split(",")]
        except ValueError:
            raise UsageError(f"bad domain bound {t!r}") from None
        if len(v) == 1:
            v = v * n
        if len(v) != n:
            raise UsageError(f"domain bound {t!r} has {len(v)} entries, need {n}")
        return v

    lo, hi = side(lo_txt), side(hi_txt)
    if not all(a < b for a, b in zip(lo, hi)):
        raise UsageError(f"domain needs lo < hi on every axis, got {text!r}")
    return lo, hi


def parse_overrides(items):
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep or key not in TOLERANCES:
            raise UsageError(f"--tol-override expects key=val with key in {sorted(TOLERANCES)}, got {item!r}")
        try:
            out[key] = float(val)
        except ValueError:
            raise UsageError(f"tolerance {key} needs a number, got {val!r}") from None
    return out


def build_parser():
    p = argparse.ArgumentParser(prog="varcomplex", description="Numerical checks of null lagrangians.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--group", help="matrix group, e.g. sl:2, gl:3, sp:2, conf:2")
    p.add_argument("--lagrangian", help="det, minor:<r>|<c>, affine:<a>:<b>, frob2, comp:<ij>, compIJsq, calabi, const:<c>")
    p.add_argument("--domain", help="box lo..hi (scalars or comma lists), default the unit box")
    p.add_argument("--resolution", type=int, help="quadrature nodes per axis (64, or 32 for rescale-limit)")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--amplitude", type=float, default=verify.DEFAULT_AMPLITUDE)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--k-list", default="1,2,4,8", help="rescaling factors for rescale-limit")
    p.add_argument("--h", type=float, help="cube scale for rescale-limit (Q_h has side 1/h)")
    p.add_argument("--expect", choices=("null", "falsified", "auto"), default="auto")
    p.add_argument("--tol-override", action="append", metavar="KEY=VAL")
    p.add_argument("--config", help="replay a stored RunConfig (or a report containing one)")
    p.add_argument("--out", help="JSON report path (standard output when omitted)")
    return p


def config_from_args(args) -> RunConfig:
    if args.config:
        data = json.loads(Path(args.config).read_text())
        cfg = RunConfig.from_dict(data.get("config", data))
        if args.out:
            cfg.out = args.out
        return cfg
    group, lag = DEFAULTS.get(args.command, ("gl:2", "det"))
    group = args.group or group
    try:
        n = GroupSpec.parse(group).n
    except VarComplexError as exc:
        raise UsageError(str(exc)) from None
    lo, hi = parse_domain(args.domain, n) if args.domain else ([0.0] * n, [1.0] * n)
    res = args.resolution or (32 if args.command == "rescale-limit" else 64)
    try:
        k_list = [int(k) for k in args.k_list.split(",")]
    except ValueError:
        raise UsageError(f"--k-list must be comma-separated integers, got {args.k_list!r}") from None
    if args.trials < 1 or args.samples < 1:
        raise UsageError("--trials and --samples must be positive")
    return RunConfig(
        command=args.command, group=group, lagrangian=args.lagrangian or lag, lower=lo, upper=hi,
        resolution=res, trials=args.trials, seed=args.seed, amplitude=args.amplitude,
        samples=args.samples, expect=args.expect, k_list=k_list, h=args.h,
        tolerances={**TOLERANCES, **parse_overrides(args.tol_override)}, out=args.out,
    )


def _head(text):
    return text.strip().partition(":")[0].lower()


def structurally_null(lagrangian, g: GroupSpec, invariance: bool):
    """Known answer for the built-in lagrangians, ``None`` when unknown.

    Minors combinations are null everywhere.  The Calabi potential passes the
    pointwise tests but its integral is invariant only under symplectic
    flows.  Conformal flows are trivial, so every invariance test passes.
    """
    head = _head(lagrangian)
    if invariance and g.tag is Tag.CONF:
        return True
    if head in _MINOR_HEADS:
        return True
    if head == "calabi":
        return g.tag is Tag.SP if invariance else True
    if head == "frob2" or (head.startswith("comp") and head.endswith("sq")):
        return False
    return None


def expected_pass(cfg: RunConfig, invariance=False, identity=False):
    """``True``/``False`` for the expected outcome, ``None`` if anything but inconclusive will do."""
    if cfg.expect != "auto":
        return cfg.expect == "null"
    if identity:
        return True
    return structurally_null(cfg.lagrangian, cfg.group_spec, invariance)


def _expect_label(e):
    return {True: "null", False: "falsified", None: "any"}[e]


# --------------------------------------------------------------------------
# subcommands: each returns (report dict, passed or None, expected)


def _lagrangian(cfg):
    return parse_lagrangian(cfg.lagrangian, cfg.group_spec.n)


def cmd_verify_null(cfg):
    W, g = _lagrangian(cfg), cfg.group_spec
    rep = verify.null_campaign(W, g, cfg.trials, cfg.seed, cfg.domain(), cfg.amplitude, cfg.tol("campaign"))
    passed = {verify.CONSISTENT: True, verify.FALSIFIED: False}.get(rep.verdict)
    return rep.to_dict(), passed, expected_pass(cfg, invariance=True)


def cmd_d_complex(cfg):
    W, g = _lagrangian(cfg), cfg.group_spec
    r = calculus.d_squared_residual(W, cfg.samples, cfg.seed, group=g)
    tol = cfg.tol("d_complex")
    return {"max_residual": r, "tolerance": tol, "samples": cfg.samples}, r <= tol, expected_pass(cfg, identity=True)


def cmd_el_check(cfg):
    W, g = _lagrangian(cfg), cfg.group_spec
    dom = cfg.domain()
    rows = []
    for s in range(cfg.seed, cfg.seed + cfg.trials):
        eta = sample_field(g, dom, cfg.amplitude, s)
        u = FlowMap(sample_field(GL(g.n), dom, cfg.amplitude, s + U_SEED_OFFSET))
        p = calculus.EL_pairing(W, u, eta, dom)
        rows.append({"seed": s, **p.to_dict(), "agrees": p.agrees(cfg.tol("el_floor"))})
    passed = all(r["agrees"] for r in rows)
    return {"trials": rows, "floor": cfg.tol("el_floor")}, passed, expected_pass(cfg, identity=True)


def _directions(rng, count, n, orthogonal=False):
    a = rng.normal(size=(count, n))
    b = rng.normal(size=(count, n))
    if orthogonal:
        b -= np.sum(a * b, -1, keepdims=True) / np.sum(a * a, -1, keepdims=True) * a
        b -= np.sum(a * b, -1, keepdims=True) / np.sum(a * a, -1, keepdims=True) * a
    return a, b


def cmd_legendre_hadamard(cfg):
    W, g = _lagrangian(cfg), cfg.group_spec
    rng = np.random.default_rng(cfg.seed)
    F = random_elements(g, cfg.samples, 0.5, rng)
    a, b = _directions(rng, cfg.samples, g.n)
    y = rng.uniform(-1, 1, size=(cfg.samples, g.n))
    vals = [calculus.legendre_hadamard(W, F[i], a[i], b[i], y=y[i]) for i in range(cfg.samples)]
    worst = float(np.max(np.abs(vals)))
    tol = cfg.tol("legendre")
    return {"max_abs": worst, "tolerance": tol, "values": vals}, worst <= tol, expected_pass(cfg)


def cmd_rank_one(cfg):
    W, g = _lagrangian(cfg), cfg.group_spec
    rng = np.random.default_rng(cfg.seed)
    F = random_elements(g, cfg.samples, 0.5, rng)
    a, b = _directions(rng, cfg.samples, g.n, orthogonal=True)
    y = rng.uniform(-1, 1, size=(cfg.samples, g.n))
    vals = [calculus.rank_one_linearity_defect(W, F[i], a[i], b[i], group=g, y=y[i]) for i in range(cfg.samples)]
    worst = float(np.max(vals))
    tol = cfg.tol("rank_one")
    return {"max_defect": worst, "tolerance": tol, "defects": vals}, worst <= tol, expected_pass(cfg)


def cmd_sl2_classify(cfg):
    g = cfg.group_spec
    if g.n != 2:
        raise UsageError("sl2-classify works in dimension 2")
    W = _lagrangian(cfg)
    if not W.homogeneous:
        raise UsageError(f"sl2-classify needs a potential of F alone, {W} depends on x or y")
    pts = verify.sl2_chart_points(cfg.samples, cfg.seed)
    R = np.array([verify.sl2_pde_residuals(W, *p) for p in pts])
    worst = np.max(np.abs(R), axis=0)
    tol = cfg.tol("sl2")
    rep = {"max_abs_residuals": dict(zip(["r5", "r6", "r7", "r8", "r9"], worst)), "tolerance": tol,
           "points": pts, "residuals": R}
    return rep, bool(np.all(worst <= tol)), expected_pass(cfg)


def cmd_rescale_limit(cfg):
    W, g = _lagrangian(cfg), cfg.group_spec
    dom = cfg.domain()
    x1 = np.asarray(dom.lower) + 0.25 * dom.sides
    h = cfg.h if cfg.h is not None else 2.0 / float(np.min(dom.sides))
    Q1 = Domain(tuple(x1), tuple(x1 + 1.0), dom.resolution)
    psi = FlowMap(sample_field(GL(g.n), dom, cfg.amplitude, cfg.seed + U_SEED_OFFSET))
    phi = FlowMap(sample_field(g, Q1, cfg.amplitude, cfg.seed))
    table = verify.rescaling_limit_check(W, psi, phi, h, cfg.k_list, dom, x1=x1)
    rows = [r for r in table.rows if not r.flagged]
    band = [max(a.error, b.error) for a, b in zip(rows, rows[1:])]
    monotone = all(b.defect <= a.defect + e for a, b, e in zip(rows, rows[1:], band))
    checks = {"non_increasing_within_band": monotone}
    null = structurally_null(cfg.lagrangian, g, invariance=False)
    if null:
        floor = cfg.tol("rescale_floor")
        checks["defects_within_2x_error"] = all(r.defect <= max(2 * r.error, floor) for r in rows)
    rep = {"table": table.to_dict(), "checks": checks, "flagged_rows": len(table.rows) - len(rows)}
    return rep, all(checks.values()), expected_pass(cfg, identity=True), table


def cmd_calabi(cfg):
    dom = Domain.unit(2, cfg.resolution) if len(cfg.lower) != 2 else cfg.domain()
    rep = verify.calabi_component_campaign((1.0, 0.0), dom, cfg.trials, cfg.seed, cfg.amplitude, cfg.tol("campaign"))
    ok = rep.sections["sp:2"].verdict == verify.CONSISTENT and rep.sections["gl:2"].verdict == verify.FALSIFIED
    return rep.to_dict(), ok, expected_pass(cfg, identity=True)


def cmd_conjecture_evidence(cfg):
    W, g = _lagrangian(cfg), cfg.group_spec
    rep = verify.conjecture_evidence(W, g, cfg.trials, cfg.seed, cfg.domain(), cfg.amplitude,
                                     max(cfg.samples, 4 * len(verify.all_minor_keys(g.n))), cfg.tol("campaign"))
    d = rep.to_dict()
    if rep.verdict == verify.CONSISTENT:
        passed = rep.extra["fit_residual"] <= cfg.tol("fit")
    else:
        passed = {verify.FALSIFIED: False}.get(rep.verdict)
    return d, passed, expected_pass(cfg, invariance=True)


HANDLERS = {
    "verify-null": cmd_verify_null,
    "d-complex": cmd_d_complex,
    "el-check": cmd_el_check,
    "legendre-hadamard": cmd_legendre_hadamard,
    "rank-one": cmd_rank_one,
    "sl2-classify": cmd_sl2_classify,
    "rescale-limit": cmd_rescale_limit,
    "calabi": cmd_calabi,
    "conjecture-evidence": cmd_conjecture_evidence,
}

# the suite behind ``all``: both directions for each check
SUITE = (
    ("verify-null", "sl:2", "affine:1,0,0,0:2"),
    ("verify-null", "sl:2", "comp11sq"),
    ("verify-null", "gl:2", "det"),
    ("verify-null", "gl:2", "frob2"),
    ("d-complex", "gl:3", "minor:12|23"),
    ("el-check", "gl:2", "frob2"),
    ("legendre-hadamard", "gl:3", "minor:12|23"),
    ("legendre-hadamard", "gl:2", "frob2"),
    ("rank-one", "sl:2", "affine:1,2,3,4:1"),
    ("rank-one", "sl:2", "frob2"),
    ("sl2-classify", "sl:2", "affine:1,2,3,4:1"),
    ("sl2-classify", "sl:2", "comp11sq"),
    ("rescale-limit", "gl:2", "frob2"),
    ("calabi", "sp:2", "calabi"),
    ("conjecture-evidence", "sl:2", "affine:1,2,3,4:1"),
)


def execute(cfg: RunConfig):
    """Run one non-``all`` config: ``(entry dict, as_expected, csv text or None)``."""
    out = HANDLERS[cfg.command](cfg)
    rep, passed, expected = out[:3]
    table = out[3] if len(out) > 3 else None
    if expected is None:
        as_expected = passed is not None
    else:
        as_expected = passed is expected
    entry = {
        "config": cfg.to_dict(with_out=False),
        "expected": _expect_label(expected),
        "outcome": {True: "null", False: "falsified", None: "inconclusive"}[passed],
        "as_expected": as_expected,
        "report": rep,
    }
    return entry, as_expected, table.to_csv() if table is not None else None


def execute_all(cfg: RunConfig):
    entries, ok = [], True
    for command, group, lag in SUITE:
        n = GroupSpec.parse(group).n
        sub = RunConfig(
            command=command, group=group, lagrangian=lag, lower=[0.0] * n, upper=[1.0] * n,
            resolution=32 if command == "rescale-limit" else cfg.resolution, trials=cfg.trials,
            seed=cfg.seed, amplitude=cfg.amplitude, samples=cfg.samples, k_list=list(cfg.k_list),
            tolerances=dict(cfg.tolerances),
        )
        entry, good, _ = execute(sub)
        entries.append(entry)
        ok &= good
    return {"config": cfg.to_dict(with_out=False), "runs": entries, "as_expected": ok}, ok


def dumps(obj):
    return json.dumps(verify._clean(obj), sort_keys=True, indent=2) + "\n"


def run(argv=None) -> int:
    """Parse ``argv``, run, write the report; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(args)
        if cfg.command == "all":
            doc, ok = execute_all(cfg)
            csv_text = None
        else:
            doc, ok, csv_text = execute(cfg)
    except (UsageError, InvalidArgument, UnsupportedConfiguration) as exc:
        # bad names and arguments surface as usage errors
        parser.print_usage(sys.stderr)
        print(f"varcomplex: error: {exc}", file=sys.stderr)
        return 2
    except VarComplexError as exc:
        # e.g. a flow leaving its group: reported, never silently skipped
        print(f"varcomplex: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    text = dumps(doc)
    if cfg.out:
        path = Path(cfg.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        if csv_text is not None:
            path.with_suffix(".csv").write_text(csv_text)
    else:
        sys.stdout.write(text)
        if csv_text is not None:
            sys.stdout.write(csv_text)
    status = "as expected" if ok else "UNEXPECTED"
    print(f"{cfg.command}: {status}", file=sys.stderr)
    return 0 if ok else 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
