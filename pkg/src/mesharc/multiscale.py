"""Level solves with residual correction: the flat and nested multiscale
Galerkin algorithms, plus solution evaluation and conditioning diagnostics.

Each stage solves the current residual equation on its own centre set and
scale and adds the correction to the running approximation:

    rhs_i[k] = <f, basis_ik> - a(u_{i-1}, basis_ik)
             = load_i[k] - sum_{j<i} (C[i,j] @ coeff_j)[k]

The nested variant sweeps the same inner levels repeatedly, reusing their
matrices and factorizations, with residual corrections accumulated over all
prior global steps.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import Assembler, ProblemSpec, StiffnessSystem
from .geometry import LevelSchedule, PointSet, neighbor_pairs
from .kernels import ScaledKernel, WendlandKernel, wendland
from .nitsche import NitscheParams, estimate_beta
from .quadrature import LobattoGrid, QuadratureSpec, error_norms

__all__ = [
    "MultiscaleSolution",
    "NestedConfig",
    "LevelDiagnostics",
    "RunResult",
    "solve_level",
    "run_multiscale",
    "run_nested",
    "condition_number",
    "evaluate",
]

DENSE_EIG_LIMIT = 5000


@dataclass(frozen=True)
class NestedConfig:
    """Outer sweep count K (passes run k = 0..K) and inner level count n."""

    K: int
    n: int

    def __post_init__(self):
        if self.K < 0 or self.n < 1:
            raise ValueError("need K >= 0 and n >= 1")

    @property
    def total_steps(self) -> int:
        return (self.K + 1) * self.n


@dataclass(frozen=True)
class LevelDiagnostics:
    """Per-step record: sizes, scale, errors against the exact solution (when
    known), the solved-residual size, and the condition number of the step's
    matrix."""

    step: int
    n_centres: int
    delta: float
    l2_error: float | None
    linf_error: float | None
    lambda_min: float | None
    lambda_max: float | None
    kappa: float | None
    kappa_approximate: bool = False
    residual: float = 0.0


@dataclass
class RunResult:
    """Everything a run produced: the evaluable solution, per-step
    diagnostics, and the penalty parameters when one was estimated."""

    solution: "MultiscaleSolution"
    diagnostics: list
    nitsche: NitscheParams | None = None

    def __iter__(self):  # allows: sol, diags = run_multiscale(...)
        return iter((self.solution, self.diagnostics))


@dataclass
class MultiscaleSolution:
    """Ordered per-level expansions summing to the approximate solution."""

    base: WendlandKernel
    normalization: str
    records: list = field(default_factory=list)  # (PointSet, delta, coeffs)

    def append(self, points: PointSet, delta: float, coeffs: np.ndarray) -> None:
        self.records.append((points, float(delta), np.asarray(coeffs, dtype=float)))

    def __len__(self) -> int:
        return len(self.records)

    def __call__(self, pts) -> np.ndarray:
        return evaluate(self, pts)


def evaluate(sol: MultiscaleSolution, pts) -> np.ndarray:
    """Evaluate a multiscale solution at query points.

    Uses fixed-radius neighbor search per level so only kernels whose
    supports cover a query point are touched.
    """
    if isinstance(pts, PointSet):
        qp = pts
    else:
        qp = PointSet(np.asarray(pts, dtype=float), provenance="external")
    out = np.zeros(len(qp))
    for points, delta, coeffs in sol.records:
        sk = ScaledKernel(sol.base, delta, sol.normalization)
        qi, cj = neighbor_pairs(qp, points, delta)
        if qi.size == 0:
            continue
        d = qp.points[qi] - points.points[cj]
        r = np.sqrt(d[:, 0] ** 2 + d[:, 1] ** 2)
        vals = sk.prefactor * sol.base.phi(r / delta) * coeffs[cj]
        np.add.at(out, qi, vals)
    return out


def solve_level(system: StiffnessSystem, rhs: np.ndarray) -> np.ndarray:
    """Direct solve of one level's system; the factorization is cached on the
    system and reused by later calls."""
    rhs = np.asarray(rhs, dtype=float)
    c = system.solve(rhs)
    denom = np.max(np.abs(rhs))
    if denom > 0:
        res = np.max(np.abs(system.matrix @ c - rhs)) / denom
        if res > 1e-10:
            warnings.warn(f"level solve residual {res:.2e} above 1e-10", stacklevel=2)
    return c


def condition_number(A, factor=None):
    """Extreme eigenvalues and condition number of a symmetric matrix.

    Dense symmetric eigensolve up to DENSE_EIG_LIMIT rows; beyond that an
    iterative extreme-eigenvalue estimate is used and flagged approximate.
    """
    n = A.shape[0]
    if n <= DENSE_EIG_LIMIT:
        dense = A.toarray() if sp.issparse(A) else np.asarray(A)
        ev = la.eigvalsh(dense)
        lmin, lmax = float(ev[0]), float(ev[-1])
        approx = False
    else:
        As = sp.csc_matrix(A)
        lmax = float(spla.eigsh(As, k=1, which="LA", return_eigenvectors=False)[0])
        op = factor or spla.splu(As)
        inv = spla.LinearOperator(A.shape, matvec=op.solve)
        lmin = 1.0 / float(
            spla.eigsh(inv, k=1, which="LA", return_eigenvectors=False)[0]
        )
        approx = True
    if lmin <= 0:
        warnings.warn("matrix is not numerically positive definite", stacklevel=2)
    return lmin, lmax, lmax / lmin, approx


class _RunState:
    """Shared machinery for the flat and nested algorithms."""

    def __init__(
        self,
        schedule: LevelSchedule,
        prob: ProblemSpec,
        spec: QuadratureSpec | None,
        base: WendlandKernel | None,
        normalization: str,
        beta: float | None,
        nitsche_mode: str,
        safety: float,
        threads: int,
        lobatto_n: int,
        compute_kappa: bool,
        log,
        n_used: int | None = None,
    ):
        self.schedule = schedule
        self.prob = prob
        self.spec = spec or QuadratureSpec()
        self.base = base or wendland()
        self.normalization = normalization
        self.compute_kappa = compute_kappa
        self.log = log or (lambda msg: None)
        self.nitsche: NitscheParams | None = None
        if prob.variant == "poisson_dirichlet" and beta is None:
            # one penalty for the whole run, from the finest level the run
            # will actually visit
            finest = schedule[(n_used or len(schedule)) - 1]
            self.log(
                f"estimating penalty from the finest level "
                f"(N={len(finest.points)}, delta={finest.delta})"
            )
            probe = Assembler(
                self.base, prob, self.spec, normalization="plain", beta=0.0,
                threads=threads,
            )
            self.nitsche = estimate_beta(
                (finest.points, finest.delta), schedule.domain,
                safety=safety, spec=self.spec, base=self.base,
                mode=nitsche_mode, assembler=probe,
            )
            beta = self.nitsche.beta
            self.log(
                f"penalty beta={beta:.6e} (lambda_max={self.nitsche.lambda_max:.6e},"
                f" mode={nitsche_mode}, safety={safety})"
            )
        self.beta = beta
        self.asm = Assembler(
            self.base,
            prob,
            self.spec,
            normalization=normalization,
            beta=beta,
            threads=threads,
        )
        self.systems: dict = {}
        self.crosses: dict = {}
        self.grid = LobattoGrid(prob.domain, lobatto_n) if prob.exact else None

    def system(self, li: int) -> StiffnessSystem:
        if li not in self.systems:
            lv = self.schedule[li]
            self.log(f"assembling level {li + 1} (N={len(lv.points)}, delta={lv.delta})")
            A = self.asm.stiffness(lv.points, lv.delta)
            b = self.asm.load(lv.points, lv.delta)
            self.systems[li] = StiffnessSystem(A, b)
        return self.systems[li]

    def cross(self, target: int, source: int) -> sp.csr_matrix:
        if target == source:
            return self.system(target).matrix
        key = (target, source)
        if key not in self.crosses:
            flipped = (source, target)
            if flipped in self.crosses:
                self.crosses[key] = self.crosses[flipped].T.tocsr()
            else:
                lt = self.schedule[target]
                ls = self.schedule[source]
                self.crosses[key] = self.asm.cross(
                    lt.points, lt.delta, ls.points, ls.delta
                )
        return self.crosses[key]

    def diagnostics(self, step: int, li: int, sol: MultiscaleSolution,
                    residual: float):
        lv = self.schedule[li]
        l2 = linf = None
        if self.grid is not None:
            l2, linf = error_norms(sol, self.prob.exact, self.grid)
        lmin = lmax = kappa = None
        approx = False
        if self.compute_kappa:
            lmin, lmax, kappa, approx = condition_number(
                self.system(li).matrix, factor=self.system(li)._factor
            )
        d = LevelDiagnostics(
            step, len(lv.points), lv.delta, l2, linf, lmin, lmax, kappa,
            approx, residual,
        )
        msg = f"step {step}: N={d.n_centres} delta={d.delta:g}"
        if l2 is not None:
            msg += f" l2={l2:.3e} linf={linf:.3e}"
        if kappa is not None:
            msg += f" kappa={kappa:.3e}"
        msg += f" residual={residual:.2e}"
        self.log(msg)
        return d


def _run(state: _RunState, level_sequence) -> tuple:
    sol = MultiscaleSolution(state.base, state.normalization)
    diags = []
    coeffs: list = []  # (level index, coefficient vector)
    for step, li in enumerate(level_sequence, start=1):
        system = state.system(li)
        rhs = system.load.copy()
        for lj, cj in coeffs:
            rhs -= state.cross(li, lj) @ cj
        c = solve_level(system, rhs)
        coeffs.append((li, c))
        lv = state.schedule[li]
        sol.append(lv.points, lv.delta, c)
        denom = float(np.max(np.abs(system.load))) or 1.0
        residual = float(np.max(np.abs(system.matrix @ c - rhs))) / denom
        diags.append(state.diagnostics(step, li, sol, residual))
    return sol, diags


def run_multiscale(
    schedule: LevelSchedule,
    prob: ProblemSpec,
    spec: QuadratureSpec | None = None,
    base: WendlandKernel | None = None,
    normalization: str = "native",
    beta: float | None = None,
    nitsche_mode: str = "sqrt",
    safety: float = 1.25,
    threads: int = 1,
    lobatto_n: int = 300,
    compute_kappa: bool = True,
    log=None,
):
    """Coarse-to-fine residual-correction sweep over all schedule levels.

    Returns (solution, diagnostics).  For the Dirichlet variant a penalty is
    estimated from the finest level unless ``beta`` is given.
    """
    state = _RunState(
        schedule, prob, spec, base, normalization, beta, nitsche_mode,
        safety, threads, lobatto_n, compute_kappa, log,
    )
    sol, diags = _run(state, range(len(schedule)))
    return RunResult(sol, diags, state.nitsche)


def run_nested(
    schedule: LevelSchedule,
    cfg: NestedConfig,
    prob: ProblemSpec,
    spec: QuadratureSpec | None = None,
    base: WendlandKernel | None = None,
    normalization: str = "native",
    beta: float | None = None,
    nitsche_mode: str = "sqrt",
    safety: float = 1.25,
    threads: int = 1,
    lobatto_n: int = 300,
    compute_kappa: bool = True,
    log=None,
):
    """Repeated coarse-to-fine sweeps: outer passes k = 0..K over the first
    n schedule levels, with residual correction against all prior steps.

    Level matrices, factorizations and coupling matrices are assembled once
    and reused across outer passes, so the per-step condition numbers repeat
    with period n.
    """
    if cfg.n > len(schedule):
        raise ValueError("inner level count exceeds the schedule length")
    state = _RunState(
        schedule, prob, spec, base, normalization, beta, nitsche_mode,
        safety, threads, lobatto_n, compute_kappa, log, n_used=cfg.n,
    )
    seq = [li for _ in range(cfg.K + 1) for li in range(cfg.n)]
    sol, diags = _run(state, seq)
    return RunResult(sol, diags, state.nitsche)
