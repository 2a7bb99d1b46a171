"""Command-line driver: solvers, bounds, class reports, example battery, sweeps.

Subcommands: ``solve``, ``kappa``, ``verify``, ``classify``, ``radial``,
``examples``, ``sweep``.  Exit codes: 0 ok, 1 verification failure, 2 usage
error, 3 solver size limit.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import bounds as bounds_mod
from . import classes as classes_mod
from .concentration import concentration_profile, kappa, kappa_discrete
from .cost import PowerH, parse_h
from .errors import InstanceTooLarge, RejectionBudgetExceeded, RepotError, ValidationError
from .measures import (
    CauchyProfile,
    DiscreteMeasure,
    GaussianProfile,
    Measure,
    RadialMeasure,
    UniformProfile,
    parse_measure,
)
from .solvers import Coupling, min_bad_mass, min_pair_distance_tensor, solve_integral, solve_supremal

REJECTION_BUDGET = 20_000


# ---------------------------------------------------------------------------
# instance generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepCell:
    n_marginals: int
    n_atoms: int
    dim: int
    count: int


@dataclass(frozen=True)
class RunConfig:
    seed: int
    cells: tuple[SweepCell, ...] = ()
    h_spec: str = "power:1"
    holds_tol: float = 1e-9
    rational: bool = False
    out: str | None = None


def _stream(cfg: RunConfig, cell: SweepCell, index: int) -> np.random.Generator:
    """Philox stream split per (seed, cell, instance); order-independent."""
    key = np.random.SeedSequence(
        entropy=cfg.seed,
        spawn_key=(cell.n_marginals, cell.n_atoms, cell.dim, index),
    )
    return np.random.Generator(np.random.Philox(key))


def gen_instance(cfg: RunConfig, cell: SweepCell, index: int = 0,
                 condition_kappa: bool = True) -> DiscreteMeasure:
    """Random discrete measure: atoms uniform in the unit cube at pairwise
    distance >= 1e-3, flat-Dirichlet weights, optionally conditioned on
    pointwise concentration below 1/N by rejection."""
    if cell.n_atoms < 2:
        raise ValidationError("need at least two atoms")
    rng = _stream(cfg, cell, index)
    pts: list[np.ndarray] = []
    tries = 0
    while len(pts) < cell.n_atoms:
        tries += 1
        if tries > REJECTION_BUDGET:
            raise RejectionBudgetExceeded("could not place separated atoms")
        p = rng.random(cell.dim)
        if all(np.linalg.norm(p - q) >= 1e-3 for q in pts):
            pts.append(p)
    for _ in range(REJECTION_BUDGET):
        w = rng.dirichlet(np.ones(cell.n_atoms))
        w = w / w.sum()
        if np.any(w <= 0):
            continue
        if not condition_kappa or w.max() < 1.0 / cell.n_marginals:
            return DiscreteMeasure(np.asarray(pts), w)
    raise RejectionBudgetExceeded(
        f"no weight draw with max below 1/{cell.n_marginals} for M={cell.n_atoms}"
    )


# ---------------------------------------------------------------------------
# worked-example battery
# ---------------------------------------------------------------------------

@dataclass
class CaseCheck:
    label: str
    computed: float
    expected: float
    tol: float

    @property
    def ok(self) -> bool:
        return abs(self.computed - self.expected) <= self.tol

    @staticmethod
    def truth(label: str, value: bool) -> "CaseCheck":
        return CaseCheck(label, 1.0 if value else 0.0, 1.0, 0.0)


@dataclass(frozen=True)
class WorkedExampleCase:
    case_id: str
    run: "callable"


def three_point_line(eps: Fraction) -> DiscreteMeasure:
    """Half the mass at 0, eps at 1 and the rest at 1/eps."""
    return DiscreteMeasure.from_rational(
        [[0.0], [1.0], [float(1 / eps)]],
        [Fraction(1, 2), eps, Fraction(1, 2) - eps],
    )


def _case_two_cluster_line() -> list[CaseCheck]:
    h = PowerH(1)
    out = []
    for eps in (Fraction(1, 10), Fraction(1, 20), Fraction(1, 100)):
        rho = three_point_line(eps)
        integ = solve_integral(rho, h, 2)
        sup = solve_supremal(rho, h, 2, rational=True)
        expect = float(2 * eps * (Fraction(3, 2) - eps))
        out.append(CaseCheck(f"integral cost (eps={eps})", integ.value, expect, 1e-9))
        out.append(CaseCheck(f"supremal cost (eps={eps})", sup.value, 1.0, 0.0))
    return out


def _case_two_cluster_gap() -> list[CaseCheck]:
    """The same measures show the gap: a fixed multiple of C_sup cannot lower-
    bound the integral cost, but the concentration-weighted bound does."""
    h = PowerH(1)
    out = []
    for eps in (Fraction(1, 10), Fraction(1, 20), Fraction(1, 100)):
        rho = three_point_line(eps)
        c_sup = solve_supremal(rho, h, 2, rational=True).value
        c_int = solve_integral(rho, h, 2).value
        gap_factor = 2.0 * kappa_discrete(rho, 4.0 / c_sup) - 1.0
        out.append(CaseCheck(f"2k(4/Csup)-1 (eps={eps})", gap_factor, float(2 * eps), 1e-12))
        out.append(CaseCheck.truth(
            f"C > (Csup/8)(2k(4/Csup)-1) (eps={eps})",
            c_int > c_sup / 8.0 * gap_factor,
        ))
        out.append(CaseCheck.truth(
            f"C >= (Csup/4)(2k(2/Csup)-1) (eps={eps})",
            c_int >= bounds_mod.main_bound_2(rho, h, c_sup) - 1e-12,
        ))
    return out


def derangement_measure(n: int, p: float, gap: float = 10.0) -> DiscreteMeasure:
    pts = np.zeros((n, 1))
    pts[:, 0] = gap * np.arange(n)
    w = np.full(n, (1.0 - p) / (n - 1))
    w[0] = p
    return DiscreteMeasure(pts, w / w.sum())


def derangement_plan(rho: DiscreteMeasure, n: int, p: float) -> Coupling:
    """Mass (1-p)/(N-1) on the identity tuple and on each cyclic shift,
    plus the excess (Np-1)/(N-1) on the constant heaviest-atom tuple."""
    m = rho.size
    share = (1.0 - p) / (n - 1)
    tensor = np.zeros((m,) * n)
    for s in range(n):
        tensor[tuple((np.arange(n) + s) % n)] += share
    tensor[(0,) * n] += (n * p - 1.0) / (n - 1)
    return Coupling(rho.points, n, tensor)


def _case_derangement() -> list[CaseCheck]:
    out = []
    for n, p in ((3, 0.5), (3, 0.6), (4, 0.4)):
        rho = derangement_measure(n, p)
        beta = 2.0  # all pairwise atom distances exceed this
        achieved = (n * p - 1.0) / (n - 1.0)
        proven = (n * p - 1.0) / (n * (n - 1.0))
        value = min_bad_mass(rho, n, beta)
        plan = derangement_plan(rho, n, p)
        plan.check_marginals(rho)
        bad = min_pair_distance_tensor(rho, n) < beta
        plan_mass = float(plan.weights[bad].sum())
        out.append(CaseCheck(f"min costly mass (N={n}, p={p})", value, achieved, 1e-9))
        out.append(CaseCheck(f"cyclic-plan costly mass (N={n}, p={p})", plan_mass, achieved, 1e-12))
        out.append(CaseCheck.truth(f"exceeds proven floor (N={n}, p={p})", value > proven + 1e-9))
    return out


def _case_shifted_uniform() -> list[CaseCheck]:
    rho = RadialMeasure(1, UniformProfile(1.0))
    out = [CaseCheck("supremal cost of uniform[-1,1]", classes_mod.c_infty_radial(rho), 1.0, 1e-6)]
    for alpha in (0.1, 0.3, 0.49, 0.51, 0.75, 0.95):
        out.append(CaseCheck(f"kappa({alpha})", kappa(rho, alpha), alpha, 1e-6))
        plan_bad = 1.0 if 2 * alpha > 1.0 else 0.0   # unit-shift plan pairs sit at distance 1
        out.append(CaseCheck.truth(
            f"floor respected at alpha={alpha}",
            plan_bad >= max(0.0, 2 * alpha - 1.0) - 1e-12,
        ))
    return out


def three_bump_atoms() -> DiscreteMeasure:
    return DiscreteMeasure.from_rational([[0.0], [1.0], [2.0]], [Fraction(1, 3)] * 3)


def _case_three_bump_strict() -> list[CaseCheck]:
    delta = 0.1
    beta = 1.0 + delta
    rho = three_bump_atoms()
    cyclic = Coupling(rho.points, 2, np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]]) / 3.0)
    cyclic.check_marginals(rho)
    bad = min_pair_distance_tensor(rho, 2) < beta
    plan_mass = float(cyclic.weights[bad].sum())
    floor = 2.0 * kappa_discrete(rho, beta / 2.0) - 1.0
    return [
        CaseCheck("cyclic-plan costly mass", plan_mass, 2.0 / 3.0, 1e-12),
        CaseCheck("concentration floor", floor, 1.0 / 3.0, 1e-12),
        CaseCheck.truth("plan mass strictly above floor", plan_mass > floor + 1e-9),
        CaseCheck("min costly mass meets floor", min_bad_mass(rho, 2, beta), 1.0 / 3.0, 1e-9),
    ]


def _case_three_bump_supremal() -> list[CaseCheck]:
    delta = 0.1
    rho = three_bump_atoms()
    sup = solve_supremal(rho, PowerH(1), 2, rational=True)
    alpha = (2.0 + delta) / 4.0   # smallest balanced-mass radius of the bump density
    return [
        CaseCheck("supremal cost of collapsed bumps", sup.value, 1.0, 0.0),
        CaseCheck.truth("exceeds the half-mass radius rate", sup.value > 1.0 / (2 * alpha) + 1e-9),
    ]


def _case_gaussian() -> list[CaseCheck]:
    out = []
    consts = []
    for sigma in (0.5, 1.0, 2.0, 10.0):
        rho = RadialMeasure(2, GaussianProfile(sigma))
        rep = classes_mod.unimodal_constant(rho)
        consts.append(rep.constant)
        out.append(CaseCheck(f"r_half (sigma={sigma})", rep.witness["r_rho"],
                             sigma * math.sqrt(2 * math.log(2)), 1e-8))
        out.append(CaseCheck(f"kappa(2 r_half) (sigma={sigma})",
                             rep.witness["kappa_2r"], 15.0 / 16.0, 1e-10))
        out.append(CaseCheck(f"constant (sigma={sigma})", rep.constant, 7.0 / 16.0, 1e-10))
    out.append(CaseCheck("sigma-invariance spread", max(consts) - min(consts), 0.0, 1e-10))
    # incomplete-gamma kernel agrees with the closed planar form
    d = 2
    scale = d * classes_mod.unit_ball_volume(d) / (2 * math.pi ** (d / 2))
    for t, sigma in ((0.7, 1.0), (2.0, 0.5), (1.0, 3.0)):
        x = t * t / (2 * sigma * sigma)
        out.append(CaseCheck(
            f"gamma kernel at t={t}, sigma={sigma}",
            scale * classes_mod.lower_incomplete_gamma(d / 2, x),
            1.0 - math.exp(-x), 1e-10,
        ))
    return out


def _case_student_t() -> list[CaseCheck]:
    heavy = RadialMeasure(1, CauchyProfile(1.0))
    rep1 = classes_mod.tail_control_constant(heavy, 0.25)
    light = RadialMeasure(1, CauchyProfile(30.0))
    rep30 = classes_mod.tail_control_constant(light, 0.25)
    return [
        CaseCheck("nu=1 doubled-median tail", rep1.witness["S_2r"],
                  1.0 - 2.0 * math.atan(2.0) / math.pi, 1e-9),
        CaseCheck.truth("nu=1 tail exceeds 1/4", rep1.witness["S_2r"] > 0.25),
        CaseCheck.truth("nu=1 inapplicable at delta=1/4", not rep1.applicable),
        CaseCheck.truth("nu=30 applicable at delta=1/4", rep30.applicable),
    ]


WORKED_EXAMPLE_CASES: tuple[WorkedExampleCase, ...] = (
    WorkedExampleCase("two-cluster-line", _case_two_cluster_line),
    WorkedExampleCase("two-cluster-gap", _case_two_cluster_gap),
    WorkedExampleCase("derangement", _case_derangement),
    WorkedExampleCase("shifted-uniform", _case_shifted_uniform),
    WorkedExampleCase("three-bump-strict", _case_three_bump_strict),
    WorkedExampleCase("three-bump-supremal", _case_three_bump_supremal),
    WorkedExampleCase("gaussian-d2", _case_gaussian),
    WorkedExampleCase("student-t", _case_student_t),
)


def run_worked_examples(stream=None) -> int:
    """Run every worked-example case, print a table, return a process status."""
    stream = stream or sys.stdout
    failures = 0
    for case in WORKED_EXAMPLE_CASES:
        checks = case.run()
        for chk in checks:
            status = "PASS" if chk.ok else "FAIL"
            if not chk.ok:
                failures += 1
            print(f"{status} [{case.case_id}] {chk.label}: "
                  f"computed={chk.computed!r} expected={chk.expected!r} tol={chk.tol:g}",
                  file=stream)
    print(f"examples: {failures} failure(s)", file=stream)
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

SWEEP_HEADER = "instance_id,N,h,C_integral,C_sup,bound_main,bound_2,holds,slack,status"


def _fmt(x: float) -> str:
    return repr(float(x))


def run_sweep(cfg: RunConfig) -> tuple[str, bool]:
    """Verify the main bounds on every generated instance; returns the CSV
    text (deterministic under the seed) and whether every row held."""
    h = parse_h(cfg.h_spec)
    lines = [SWEEP_HEADER]
    all_hold = True
    instance_id = 0
    for cell in cfg.cells:
        for index in range(cell.count):
            row_id = f"{cell.n_marginals}-{cell.n_atoms}-{cell.dim}-{index}"
            try:
                rho = gen_instance(cfg, cell, index)
                reports = bounds_mod.verify_main(rho, h, cell.n_marginals,
                                                 rational=cfg.rational,
                                                 tol=cfg.holds_tol)
                holds = all(r.holds for r in reports)
                ok_pos = bounds_mod.positivity_check(rho, h, cell.n_marginals,
                                                     reports[0].c_sup)
                holds = holds and ok_pos
                main = reports[0]
                second = reports[1].bound_value if len(reports) > 1 else math.nan
                best = max(r.bound_value for r in reports)
                lines.append(",".join([
                    row_id, str(cell.n_marginals), cfg.h_spec,
                    _fmt(main.c_integral), _fmt(main.c_sup),
                    _fmt(main.bound_value), _fmt(second),
                    str(holds).lower(), _fmt(main.c_integral - best), "ok",
                ]))
                all_hold = all_hold and holds
            except RepotError as exc:
                lines.append(",".join([row_id, str(cell.n_marginals), cfg.h_spec,
                                       "", "", "", "", "", "",
                                       f"error:{type(exc).__name__}"]))
                all_hold = False
            instance_id += 1
    return "\n".join(lines) + "\n", all_hold


# ---------------------------------------------------------------------------
# argument parsing and handlers
# ---------------------------------------------------------------------------

def _load_measure(path: str) -> Measure:
    with open(path) as fh:
        return parse_measure(fh.read())


def _radial_from_spec(spec: str, dim: int) -> RadialMeasure:
    name, _, arg = spec.partition(":")
    if name == "gaussian":
        return RadialMeasure(dim, GaussianProfile(float(arg)))
    if name == "cauchy":
        return RadialMeasure(dim, CauchyProfile(float(arg)))
    if name == "uniform":
        return RadialMeasure(dim, UniformProfile(float(arg)))
    raise ValidationError(f"unknown radial profile spec {spec!r}")


def _cmd_solve(args) -> int:
    rho = _load_measure(args.measure)
    if not isinstance(rho, DiscreteMeasure):
        raise ValidationError("solvers operate on discrete measures")
    h = parse_h(args.h)
    if args.which == "integral":
        report = solve_integral(rho, h, args.N)
    else:
        report = solve_supremal(rho, h, args.N, rational=args.rational)
    print(f"value={report.value!r} status={report.status} iterations={report.iterations}")
    if args.out and report.coupling is not None:
        with open(args.out, "w") as fh:
            json.dump(report.coupling.to_json_obj(), fh)
    return 0


def _parse_grid(text: str) -> np.ndarray:
    lo, hi, step = (float(v) for v in text.split(":"))
    if step <= 0 or hi < lo:
        raise ValidationError(f"bad grid spec {text!r}")
    return np.arange(lo, hi + step / 2, step)


def _cmd_kappa(args) -> int:
    rho = _load_measure(args.measure)
    if args.profile:
        grid = _parse_grid(args.grid)
        print("alpha,kappa")
        if isinstance(rho, DiscreteMeasure):
            for a in grid:
                print(f"{float(a)!r},{kappa_discrete(rho, float(a), closed=not args.open)!r}")
        else:
            cdf = concentration_profile(rho)
            for a in grid:
                print(f"{float(a)!r},{float(cdf(float(a)))!r}")
        return 0
    if args.alpha is None:
        raise ValidationError("either --alpha or --profile --grid is required")
    if isinstance(rho, DiscreteMeasure):
        value = kappa_discrete(rho, args.alpha, closed=not args.open)
    else:
        value = kappa(rho, args.alpha)
    print(repr(value))
    return 0


def _cmd_verify(args) -> int:
    rho = _load_measure(args.measure)
    if not isinstance(rho, DiscreteMeasure):
        raise ValidationError("verification operates on discrete measures")
    h = parse_h(args.h)
    reports = bounds_mod.verify_main(rho, h, args.N, rational=args.rational,
                                     tol=args.tol)
    holds = all(r.holds for r in reports)
    holds = holds and bounds_mod.positivity_check(rho, h, args.N, reports[0].c_sup)
    main = reports[0]
    second = reports[1].bound_value if len(reports) > 1 else math.nan
    best = max(r.bound_value for r in reports)
    csv = SWEEP_HEADER + "\n" + ",".join([
        "single", str(args.N), args.h, _fmt(main.c_integral), _fmt(main.c_sup),
        _fmt(main.bound_value), _fmt(second), str(holds).lower(),
        _fmt(main.c_integral - best), "ok",
    ]) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(csv)
    else:
        sys.stdout.write(csv)
    return 0 if holds else 1


def _cmd_classify(args) -> int:
    rho = _load_measure(args.measure)
    reports = []
    if isinstance(rho, DiscreteMeasure):
        attempts = [
            lambda: classes_mod.discrete_class_constant(rho),
            lambda: classes_mod.tail_control_constant(rho, args.delta),
        ]
    else:
        attempts = [
            lambda: classes_mod.unimodal_constant(rho),
            lambda: classes_mod.log_concave_check(rho),
            lambda: classes_mod.tail_control_constant(rho, args.delta),
        ]
    for attempt in attempts:
        try:
            reports.append(attempt().to_json_obj())
        except RepotError as exc:
            reports.append({"error": f"{type(exc).__name__}: {exc}"})
    print(json.dumps(reports, indent=2))
    return 0


def _cmd_radial(args) -> int:
    rho = _radial_from_spec(args.profile, args.dim)
    if args.action == "cdf":
        print(repr(classes_mod.radial_cdf(rho, args.r)))
    elif args.action == "tau":
        print(repr(classes_mod.tau(rho, args.r)))
    elif args.action == "map":
        vec = np.zeros(rho.dim)
        vec[0] = args.r
        print(json.dumps([float(v) for v in classes_mod.radial_map(rho, vec)]))
    else:
        print(repr(classes_mod.c_infty_radial(rho)))
    return 0


def _cmd_examples(args) -> int:
    return run_worked_examples()


def _parse_cells(specs: list[str]) -> tuple[SweepCell, ...]:
    cells = []
    for spec in specs:
        n, m, d, count = (int(v) for v in spec.split(":"))
        cells.append(SweepCell(n, m, d, count))
    return tuple(cells)


def _cmd_sweep(args) -> int:
    cfg = RunConfig(seed=args.seed, cells=_parse_cells(args.cells or []),
                    h_spec=args.h, holds_tol=args.tol, rational=args.rational,
                    out=args.out)
    csv, ok = run_sweep(cfg)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(csv)
    else:
        sys.stdout.write(csv)
    rows = csv.count("\n") - 1
    print(f"sweep: {rows} instance(s), all holds: {str(ok).lower()}", file=sys.stderr)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="PRNG seed for generated instances")
    common.add_argument("--rational", action="store_true",
                        help="decide feasibility in exact fraction arithmetic")
    common.add_argument("--tol", type=float, default=1e-9, help="verification tolerance")
    common.add_argument("--out", default=None, help="output path (CSV or JSON)")

    parser = argparse.ArgumentParser(prog="repot",
                                     description="repulsive optimal-transport toolbox")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="solve a transport cost exactly")
    p.add_argument("which", choices=("integral", "supremal"))
    p.add_argument("--measure", required=True)
    p.add_argument("--h", default="power:1")
    p.add_argument("--N", type=int, default=2)
    p.set_defaults(handler=_cmd_solve)

    p = sub.add_parser("kappa", parents=[common], help="concentration function")
    p.add_argument("--measure", required=True)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--open", action="store_true", help="use open balls")
    p.add_argument("--profile", action="store_true", help="emit alpha,kappa CSV over --grid")
    p.add_argument("--grid", default="0:1:0.1", help="lo:hi:step")
    p.set_defaults(handler=_cmd_kappa)

    p = sub.add_parser("verify", parents=[common], help="check the lower bounds on one measure")
    p.add_argument("--measure", required=True)
    p.add_argument("--h", default="power:1")
    p.add_argument("--N", type=int, default=2)
    p.set_defaults(handler=_cmd_verify)

    p = sub.add_parser("classify", parents=[common], help="per-class constant report")
    p.add_argument("--measure", required=True)
    p.add_argument("--delta", type=float, default=0.25)
    p.set_defaults(handler=_cmd_classify)

    p = sub.add_parser("radial", parents=[common], help="radial CDF / reflection map")
    p.add_argument("action", choices=("cdf", "tau", "map", "cinf"))
    p.add_argument("--profile", required=True, help="gaussian:S | cauchy:NU | uniform:A")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--r", type=float, default=0.0)
    p.set_defaults(handler=_cmd_radial)

    p = sub.add_parser("examples", parents=[common], help="reproduce the worked examples")
    p.set_defaults(handler=_cmd_examples)

    p = sub.add_parser("sweep", parents=[common], help="randomized verification sweep")
    p.add_argument("--cells", action="append", metavar="N:M:D:COUNT",
                   help="cell spec, repeatable")
    p.add_argument("--h", default="power:1")
    p.set_defaults(handler=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except InstanceTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (OSError, RepotError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
