"""Configuration-driven experiment runner.

Subcommands: ``solve`` (flat multiscale run), ``nested`` (outer/inner
sweeps), ``rates`` (error-ratio estimates from a run CSV), ``angles``
(subspace angles for a schedule), ``verify`` (self-check oracle suite).

Exit codes are a stable contract: 0 success, 1 numerical failure, 2
usage or configuration error.  Reruns of the same configuration produce
byte-identical CSV bodies regardless of ``--threads``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analysis, assembly, geometry, kernels, multiscale, nitsche, quadrature

CONFIG_DIR = Path(__file__).parent / "configs"


class ConfigError(Exception):
    """Invalid or unreadable run configuration (exit status 2)."""


# --- configuration ----------------------------------------------------------


@dataclass
class RunConfig:
    prob: assembly.ProblemSpec
    base: kernels.WendlandKernel
    normalization: str
    schedule: geometry.LevelSchedule
    nested: multiscale.NestedConfig | None
    nitsche_mode: str
    nitsche_safety: float
    beta: float | None
    spec: quadrature.QuadratureSpec
    lobatto_n: int
    angle_inner: str
    output: str
    mu: float


def _field(cfg: dict, path: str, default=None, required=False):
    cur = cfg
    for part in path.split("."):
        if not isinstance(cur, dict) or part not in cur:
            if required:
                raise ConfigError(f"missing config field '{path}'")
            return default
        cur = cur[part]
    return cur


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config parse error in {path} at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}"
        ) from exc

    name = _field(cfg, "problem", required=True)
    if name not in assembly.PROBLEMS:
        raise ConfigError(
            f"unknown problem '{name}' (available: {sorted(assembly.PROBLEMS)})"
        )
    prob = assembly.PROBLEMS[name]

    family = _field(cfg, "kernel.family", "wendland")
    if family != "wendland":
        raise ConfigError(f"unknown kernel family '{family}'")
    k = int(_field(cfg, "kernel.k", 3))
    try:
        base = kernels.wendland(k)
    except ValueError as exc:
        raise ConfigError(f"bad kernel.k: {exc}") from exc

    normalization = _field(cfg, "normalization", "native")
    if normalization not in ("native", "plain"):
        raise ConfigError("normalization must be 'native' or 'plain'")

    mu = float(_field(cfg, "mu", 0.5))
    levels = _field(cfg, "levels", required=True)
    try:
        if isinstance(levels, list):
            if not levels:
                raise ConfigError("levels list is empty")
            ms = [int(_field(lv, "grid_m", required=True)) for lv in levels]
            deltas = [float(_field(lv, "delta", required=True)) for lv in levels]
            schedule = geometry.LevelSchedule.from_grids(
                prob.domain, ms, deltas=deltas, mu=mu
            )
        elif isinstance(levels, dict):
            m0 = int(_field(levels, "m0", required=True))
            n_levels = int(_field(levels, "n_levels", required=True))
            nu = float(_field(levels, "nu", required=True))
            ms = [m0]
            for _ in range(n_levels - 1):
                ms.append(2 * ms[-1] - 1)  # nested uniform refinement
            schedule = geometry.LevelSchedule.from_grids(
                prob.domain, ms, nu=nu, mu=mu
            )
        else:
            raise ConfigError("levels must be a list or a generator object")
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad levels config: {exc}") from exc

    nested = None
    if _field(cfg, "nested") is not None:
        try:
            nested = multiscale.NestedConfig(
                K=int(_field(cfg, "nested.K", required=True)),
                n=int(_field(cfg, "nested.n", required=True)),
            )
        except ValueError as exc:
            raise ConfigError(f"bad nested config: {exc}") from exc

    mode = _field(cfg, "nitsche.mode", "literal")
    if mode not in nitsche.MODES:
        raise ConfigError(f"nitsche.mode must be one of {nitsche.MODES}")
    safety = float(_field(cfg, "nitsche.safety", 1.25))
    beta = _field(cfg, "nitsche.beta")
    beta = None if beta is None else float(beta)

    try:
        spec = quadrature.QuadratureSpec(
            order=int(_field(cfg, "quadrature.order", 5)),
            subdiv=int(_field(cfg, "quadrature.subdiv", 4)),
            tol=float(_field(cfg, "quadrature.tol", 1e-10)),
        )
    except ValueError as exc:
        raise ConfigError(f"bad quadrature config: {exc}") from exc
    lobatto_n = int(_field(cfg, "quadrature.lobatto_n", 300))

    angle_inner = _field(cfg, "angles.inner", "form")
    if angle_inner not in analysis.INNER_PRODUCTS:
        raise ConfigError(f"angles.inner must be one of {analysis.INNER_PRODUCTS}")

    output = _field(cfg, "output", "runs/out")
    return RunConfig(
        prob=prob,
        base=base,
        normalization=normalization,
        schedule=schedule,
        nested=nested,
        nitsche_mode=mode,
        nitsche_safety=safety,
        beta=beta,
        spec=spec,
        lobatto_n=lobatto_n,
        angle_inner=angle_inner,
        output=output,
        mu=mu,
    )


# --- output writers ---------------------------------------------------------


def _fmt(v) -> str:
    return "" if v is None else f"{v:.12e}"


def write_levels_csv(diags, path) -> None:
    lines = ["level,N,delta,l2_error,linf_error,kappa"]
    for d in diags:
        lines.append(
            f"{d.step},{d.n_centres},{d.delta:.12g},"
            f"{_fmt(d.l2_error)},{_fmt(d.linf_error)},{_fmt(d.kappa)}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_l2_column(path):
    rows = Path(path).read_text().strip().splitlines()
    header = rows[0].split(",")
    col = header.index("l2_error")
    return [float(r.split(",")[col]) for r in rows[1:]]


def write_rates_csv(report: analysis.RateReport, path) -> None:
    lines = ["transition,ratio,class,sigma"]
    last_refine = None
    for e in report.entries:
        if e.kind == analysis.RATE_REFINE and not e.flagged:
            last_refine = e.step
    for e in report.entries:
        ratio = "nan" if e.flagged else f"{e.ratio:.12e}"
        sigma = (
            _fmt(report.sigma)
            if report.sigma is not None and e.step == last_refine
            else ""
        )
        lines.append(f"{e.step},{ratio},{e.kind},{sigma}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_angles_csv(entries, path) -> None:
    lines = ["i,sin_alpha"]
    for a in entries:
        lines.append(f"{a.index},{'' if a.sin_alpha is None else f'{a.sin_alpha:.12e}'}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_nitsche_csv(par: nitsche.NitscheParams, path) -> None:
    Path(path).write_text(
        "beta,lambda_max,mode,safety,fallback\n"
        f"{par.beta:.12e},{par.lambda_max:.12e},{par.mode},{par.safety:.12g},"
        f"{int(par.fallback)}\n"
    )


def plot_errors_svg(diags, path) -> None:
    """Error-vs-level line plot on a log scale, written as standalone SVG."""
    pts = [(d.step, d.l2_error, d.linf_error) for d in diags if d.l2_error]
    if not pts:
        return
    w, h, m = 480, 320, 48
    ys = [v for _, l2, li in pts for v in (l2, li) if v]
    lo = np.floor(np.log10(min(ys)))
    hi = np.ceil(np.log10(max(ys)))
    hi = hi if hi > lo else lo + 1
    xs = [p[0] for p in pts]

    def sx(x):
        if len(xs) == 1:
            return w / 2
        return m + (w - 2 * m) * (x - xs[0]) / (xs[-1] - xs[0])

    def sy(v):
        return h - m - (h - 2 * m) * (np.log10(v) - lo) / (hi - lo)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<line x1="{m}" y1="{h-m}" x2="{w-m}" y2="{h-m}" stroke="black"/>',
        f'<line x1="{m}" y1="{m}" x2="{m}" y2="{h-m}" stroke="black"/>',
    ]
    for dec in range(int(lo), int(hi) + 1):
        y = sy(10.0 ** dec)
        parts.append(
            f'<line x1="{m-4}" y1="{y:.2f}" x2="{m}" y2="{y:.2f}" stroke="black"/>'
            f'<text x="6" y="{y+4:.2f}" font-size="10">1e{dec}</text>'
        )
    for x in xs:
        parts.append(
            f'<text x="{sx(x)-3:.2f}" y="{h-m+16}" font-size="10">{x}</text>'
        )
    for idx, color, label in ((1, "#1f77b4", "l2"), (2, "#d62728", "linf")):
        seq = [(p[0], p[idx]) for p in pts if p[idx]]
        if not seq:
            continue
        path_d = " ".join(
            f"{'M' if k == 0 else 'L'}{sx(x):.2f},{sy(v):.2f}"
            for k, (x, v) in enumerate(seq)
        )
        parts.append(f'<path d="{path_d}" fill="none" stroke="{color}"/>')
        parts.append(
            f'<text x="{w-m+4}" y="{sy(seq[-1][1]):.2f}" font-size="10" '
            f'fill="{color}">{label}</text>'
        )
    parts.append(
        f'<text x="{w/2-30:.0f}" y="{h-8}" font-size="11">level</text></svg>'
    )
    Path(path).write_text("\n".join(parts) + "\n")


class _Logger:
    def __init__(self, path):
        self.lines = []
        self.path = path

    def __call__(self, msg):
        self.lines.append(str(msg))

    def flush(self):
        Path(self.path).write_text("\n".join(self.lines) + "\n")


# --- subcommands ------------------------------------------------------------


def _outdir(cfg: RunConfig, args) -> Path:
    out = Path(args.out) if args.out else Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _validate_solver_schedule(cfg: RunConfig) -> None:
    # solver sweeps need shrinking scales over growing centre sets; the
    # angles command deliberately accepts degenerate schedules
    deltas = [lv.delta for lv in cfg.schedule]
    if any(b >= a for a, b in zip(deltas[:-1], deltas[1:])):
        raise ConfigError("scales must be strictly decreasing across levels")
    sizes = [len(lv.points) for lv in cfg.schedule]
    if any(b <= a for a, b in zip(sizes[:-1], sizes[1:])):
        raise ConfigError("grid sizes must be strictly increasing across levels")


def _run_common(cfg: RunConfig, args, nested: bool) -> int:
    _validate_solver_schedule(cfg)
    out = _outdir(cfg, args)
    log = _Logger(out / "run.log")
    kwargs = dict(
        spec=cfg.spec,
        base=cfg.base,
        normalization=cfg.normalization,
        beta=cfg.beta,
        nitsche_mode=cfg.nitsche_mode,
        safety=cfg.nitsche_safety,
        threads=args.threads,
        lobatto_n=cfg.lobatto_n,
        log=log,
    )
    if nested:
        if cfg.nested is None:
            raise ConfigError("nested run requires a 'nested' config block")
        result = multiscale.run_nested(cfg.schedule, cfg.nested, cfg.prob, **kwargs)
    else:
        result = multiscale.run_multiscale(cfg.schedule, cfg.prob, **kwargs)
    write_levels_csv(result.diagnostics, out / "levels.csv")
    if result.nitsche is not None:
        write_nitsche_csv(result.nitsche, out / "nitsche.csv")
    try:
        plot_errors_svg(result.diagnostics, out / "errors.svg")
    except Exception as exc:  # plotting failure never fails the run
        log(f"plotting failed: {exc}")
    log.flush()
    print(f"wrote {out / 'levels.csv'}")
    return 0


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    return _run_common(cfg, args, nested=False)


def cmd_nested(args) -> int:
    cfg = load_config(args.config)
    return _run_common(cfg, args, nested=True)


def cmd_rates(args) -> int:
    if not Path(args.csv).exists():
        raise ConfigError(f"run CSV not found: {args.csv}")
    errs = read_l2_column(args.csv)
    report = analysis.rate_estimates(
        errs, n=args.inner_n, nested=args.nested, mu=args.mu
    )
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    write_rates_csv(report, out / "rates.csv")
    print(f"wrote {out / 'rates.csv'}")
    return 0


def cmd_angles(args) -> int:
    cfg = load_config(args.config)
    out = _outdir(cfg, args)
    if len(cfg.schedule) < 2:
        print("warning: need at least two levels for angle estimates")
        write_angles_csv([], out / "angles.csv")
        return 0
    beta = cfg.beta
    if (
        cfg.angle_inner == "form"
        and cfg.prob.variant == "poisson_dirichlet"
        and beta is None
    ):
        par = nitsche.beta_schedule(
            cfg.schedule, safety=cfg.nitsche_safety, spec=cfg.spec,
            base=cfg.base, mode=cfg.nitsche_mode,
        )
        beta = par.beta
    entries = analysis.subspace_angles(
        cfg.schedule, base=cfg.base, inner=cfg.angle_inner,
        prob=cfg.prob, spec=cfg.spec, beta=beta,
    )
    write_angles_csv(entries, out / "angles.csv")
    log = _Logger(out / "angles.log")
    for a in entries:
        if a.skipped:
            log(f"i={a.index}: skipped ({a.reason})")
        else:
            log(
                f"i={a.index}: sin_alpha={a.sin_alpha:.6e} "
                f"complement={a.complement:.6e}"
            )
    log(f"rate bound: {analysis.nested_rate_bound([a.sin_alpha for a in entries]):.12f}")
    log.flush()
    print(f"wrote {out / 'angles.csv'}")
    return 0


# --- self-check suite -------------------------------------------------------


def _simpson(f, a, b, n=10000):
    x = np.linspace(a, b, 2 * n + 1)
    y = f(x)
    return (b - a) / (6 * n) * (y[0] + y[-1] + 4 * y[1::2].sum() + 2 * y[2:-1:2].sum())


INTERIOR_GRAD_CONST = 2453.0 / 4845.0      # int_0^1 r phi'(r)^2 dr, C6 member
BOUNDARY_GRAD_CONST = 141328.0 / 33915.0   # delta * full-chord integral of phi_d'(t)^2
PUBLISHED_BOUNDARY_CONST = 603969552384.0 / 11305.0  # published value (see check below)


def check_kernel_derivative() -> tuple:
    # stay a little away from r=1, where the derivative vanishes to high
    # order and the relative finite-difference error is unbounded
    rs = np.linspace(1e-3, 0.99, 57)
    worst = 0.0
    for k in (1, 3):
        ker = kernels.wendland(k)
        h = 1e-6
        fd = (ker.phi(rs + h) - ker.phi(rs - h)) / (2 * h)
        worst = max(worst, float(np.max(np.abs(fd - ker.dphi(rs)) / np.abs(ker.dphi(rs)))))
    return worst <= 1e-6, f"max rel deviation {worst:.2e}"


def check_gradient_fd() -> tuple:
    sk = kernels.ScaledKernel(kernels.wendland(), 0.8, "plain")
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(30):
        x = rng.uniform(-0.4, 0.4, 2)
        y = rng.uniform(-0.4, 0.4, 2)
        if np.hypot(*(x - y)) > 0.75:
            continue
        g = sk.gradient(x, y)
        h = 1e-6
        for c in range(2):
            dx = np.zeros(2)
            dx[c] = h
            fd = (sk.value(x + dx, y) - sk.value(x - dx, y)) / (2 * h)
            worst = max(worst, abs(fd - g[c]) / max(1e-12, abs(g[c])))
    return worst <= 1e-5, f"max rel deviation {worst:.2e}"


def check_radial_interior() -> tuple:
    ker = kernels.wendland()
    simpson = float(_simpson(lambda r: r * ker.dphi(r) ** 2, 0.0, 1.0))
    ok1 = abs(simpson - INTERIOR_GRAD_CONST) <= 1e-9
    # 2-D quadrature of the gradient norm over one interior support
    dom = geometry.RectDomain(-1, 1, -1, 1)
    sk = kernels.ScaledKernel(ker, 0.5, "plain")

    def g(p):
        gr = sk.gradient(p, np.zeros(2))
        return (gr * gr).sum(axis=1)

    val = quadrature.integrate_support_pair(
        g, np.zeros(2), 0.5, np.zeros(2), 0.5, dom
    ).value
    ok2 = abs(val - 2 * np.pi * INTERIOR_GRAD_CONST) <= 1e-8
    return ok1 and ok2, (
        f"simpson={simpson:.12f} closed={INTERIOR_GRAD_CONST:.12f} "
        f"2d={val:.10f} vs {2*np.pi*INTERIOR_GRAD_CONST:.10f}"
    )


def check_radial_boundary() -> tuple:
    # The reference boundary integral runs along one edge through an
    # on-edge centre; there the kernel gradient is tangential, so the
    # integrand is the squared derivative along the edge.
    ker = kernels.wendland()
    delta = 0.5
    simpson = float(
        _simpson(lambda t: (ker.dphi(np.abs(t) / delta) / delta) ** 2, -delta, delta)
    )
    closed = BOUNDARY_GRAD_CONST / delta
    ok1 = abs(simpson - closed) <= 1e-9 * max(1.0, closed)
    dom = geometry.RectDomain(-1, 1, -1, 1)
    sk = kernels.ScaledKernel(ker, delta, "plain")
    centre = np.array([0.0, -1.0])

    def g(p, normal):
        tangent = np.array([-normal[1], normal[0]])
        return (sk.gradient(p, centre) @ tangent) ** 2

    val = quadrature.integrate_boundary(g, dom, centre, delta).value
    ok2 = abs(val - simpson) <= 1e-9 * max(1.0, closed)
    published_ratio = (PUBLISHED_BOUNDARY_CONST * delta) / closed
    return ok1 and ok2, (
        f"oracle={simpson:.10f} closed-form={closed:.10f} quadrature={val:.10f}; "
        f"published constant is {published_ratio:.3e} x the oracle value at delta=0.5 "
        f"and carries the inverse scale power: corrected constant "
        f"{BOUNDARY_GRAD_CONST:.10f}/delta is the regression value"
    )


def check_dense_assembly() -> tuple:
    dom = geometry.RectDomain(-1, 1, -1, 1)
    prob = assembly.PROBLEMS["helmholtz_neumann"]
    ps = geometry.uniform_grid(dom, 3)
    sk = kernels.ScaledKernel(kernels.wendland(), 1.0, "plain")
    asm = assembly.Assembler(sk.base, prob, normalization="plain")
    A = asm.stiffness(ps, 1.0).toarray()
    ref = assembly.dense_oracle_matrix(ps.points, sk, prob)
    rel = float(np.max(np.abs(A - ref)) / np.max(np.abs(ref)))
    return rel <= 1e-8, f"max rel deviation {rel:.2e}"


def check_symmetry() -> tuple:
    dom = geometry.RectDomain(-1, 1, -1, 1)
    prob = assembly.PROBLEMS["helmholtz_neumann"]
    ps = geometry.uniform_grid(dom, 5)
    asm = assembly.Assembler(kernels.wendland(), prob)
    A = asm.stiffness(ps, 2.0)
    gap = float(np.max(np.abs((A - A.T).toarray())))
    return gap == 0.0, f"max |A - A^T| = {gap:g}"


def check_gram_spd() -> tuple:
    rng = np.random.default_rng(int(os.environ.get("MESHARC_SEED", "0")))
    ker = kernels.wendland()
    sk = kernels.ScaledKernel(ker, 1.0, "plain")
    worst = np.inf
    for _ in range(20):
        n = rng.integers(2, 11)
        pts = rng.uniform(-1, 1, (n, 2))
        if np.min(
            np.linalg.norm(pts[:, None] - pts[None, :], axis=2)
            + np.eye(n)
        ) < 1e-3:
            continue
        G = sk.value(pts[:, None, :], pts[None, :, :])
        worst = min(worst, float(np.min(np.linalg.eigvalsh(G))))
    return worst > 0, f"min Gram eigenvalue {worst:.3e}"


def check_neighbor_bruteforce() -> tuple:
    rng = np.random.default_rng(int(os.environ.get("MESHARC_SEED", "0")) + 1)
    X = geometry.PointSet(rng.uniform(-1, 1, (120, 2)))
    Y = geometry.PointSet(rng.uniform(-1, 1, (90, 2)))
    cutoff = 0.3
    ii, jj = geometry.neighbor_pairs(X, Y, cutoff)
    got = set(zip(ii.tolist(), jj.tolist()))
    d = np.linalg.norm(X.points[:, None] - Y.points[None, :], axis=2)
    want = set(zip(*[a.tolist() for a in np.nonzero(d < cutoff)]))
    return got == want, f"{len(got)} pairs vs brute-force {len(want)}"


def check_normalization_invariance() -> tuple:
    dom = geometry.RectDomain(-1, 1, -1, 1)
    prob = assembly.PROBLEMS["helmholtz_neumann"]
    ps = geometry.uniform_grid(dom, 5)
    kap = []
    for norm in ("native", "plain"):
        asm = assembly.Assembler(kernels.wendland(), prob, normalization=norm)
        A = asm.stiffness(ps, 2.0)
        kap.append(multiscale.condition_number(A)[2])
    rel = abs(kap[0] - kap[1]) / kap[0]
    return rel <= 1e-10, f"kappa native={kap[0]:.6e} plain={kap[1]:.6e} rel {rel:.2e}"


VERIFY_CHECKS = (
    ("kernel-derivative-fd", check_kernel_derivative),
    ("kernel-gradient-fd", check_gradient_fd),
    ("radial-oracle-interior", check_radial_interior),
    ("radial-oracle-boundary", check_radial_boundary),
    ("dense-assembly-oracle", check_dense_assembly),
    ("stiffness-symmetry", check_symmetry),
    ("gram-positive-definite", check_gram_spd),
    ("neighbor-brute-force", check_neighbor_bruteforce),
    ("normalization-invariance", check_normalization_invariance),
)


def cmd_verify(args) -> int:
    failures = 0
    for name, fn in VERIFY_CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failures += not ok
    return 1 if failures else 0


# --- entry point ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mesharc",
        description="multiscale kernel Galerkin experiment runner",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="JSON run configuration")
        sp.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        sp.add_argument("--out", default=None, help="output directory override")

    common(sub.add_parser("solve", help="run the multiscale algorithm"))
    common(sub.add_parser("nested", help="run the nested multiscale algorithm"))

    pr = sub.add_parser("rates", help="rate estimates from a run CSV")
    pr.add_argument("--csv", required=True, help="levels.csv from a previous run")
    pr.add_argument("--inner-n", type=int, default=None)
    pr.add_argument("--nested", action="store_true")
    pr.add_argument("--mu", type=float, default=0.5)
    pr.add_argument("--out", default=None)

    pa = sub.add_parser("angles", help="subspace angle estimates")
    common(pa)

    pv = sub.add_parser("verify", help="run the oracle self-check suite")
    pv.add_argument("--threads", type=int, default=1)
    return p


COMMANDS = {
    "solve": cmd_solve,
    "nested": cmd_nested,
    "rates": cmd_rates,
    "angles": cmd_angles,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
