import numpy as np
import pytest
import scipy.linalg as la

from mesharc.assembly import Assembler, PROBLEMS, assemble_stiffness
from mesharc.geometry import LevelSchedule, PointSet, uniform_grid
from mesharc.kernels import wendland
from mesharc.nitsche import NitscheParams, beta_schedule, estimate_beta, params_from_grams


def test_interior_supports_rejected(square):
    ps = PointSet(np.array([[0.0, 0.0], [0.1, 0.1]]))
    with pytest.raises(ValueError, match="boundary"):
        estimate_beta((ps, 0.3), square)


def test_safety_and_mode_validation(square):
    ps = uniform_grid(square, 3)
    with pytest.raises(ValueError):
        estimate_beta((ps, 1.0), square, safety=1.0)
    with pytest.raises(ValueError):
        estimate_beta((ps, 1.0), square, mode="both")


def test_degenerate_trace_falls_back_to_minimum_penalty():
    B = np.zeros((3, 3))
    D = np.eye(3)
    with pytest.warns(UserWarning, match="fallback"):
        par = params_from_grams(B, D, delta=0.5)
    assert par.fallback
    assert par.beta == pytest.approx(2.0)  # 1/delta
    assert par.lambda_max == 0.0


def test_singular_gradient_gram_shifted():
    B = np.eye(2)
    D = np.array([[1.0, 1.0], [1.0, 1.0]])  # rank one
    with pytest.warns(UserWarning, match="singular"):
        par = params_from_grams(B, D)
    assert par.fallback
    assert np.isfinite(par.beta)


def test_params_invariants():
    with pytest.raises(ValueError):
        NitscheParams(1.0, 1.0, beta=0.0, safety=1.25)
    par = params_from_grams(np.eye(2) * 3.0, np.eye(2), mode="sqrt")
    assert par.lambda_max == pytest.approx(3.0)
    assert par.c_n_over_sqrt_delta == pytest.approx(np.sqrt(3.0))
    assert par.beta == pytest.approx(1.25 * 2 * 3.0)
    lit = params_from_grams(np.eye(2) * 3.0, np.eye(2), mode="literal")
    assert lit.beta == pytest.approx(1.25 * 2 * 9.0)
    assert lit.beta > par.beta  # literal reading dominates once lambda > 1


def test_matches_dense_generalized_eigensolve(square):
    # independent oracle: eigenvalues of inv(D) @ B
    ps = uniform_grid(square, 5)
    delta = 2.0
    base = wendland(3)
    par = estimate_beta((ps, delta), square, base=base)
    prob = PROBLEMS["poisson_dirichlet"]
    asm = Assembler(base, prob, normalization="plain", beta=0.0)
    band = np.nonzero(square.boundary_distance(ps.points) < delta)[0]
    B = asm.boundary_normal_gram(ps, delta, subset=band)
    D = asm.gradient_gram(ps, delta, subset=band)
    lam_oracle = float(np.max(np.linalg.eigvals(np.linalg.solve(D, B)).real))
    assert par.lambda_max == pytest.approx(lam_oracle, rel=1e-8)


def test_rayleigh_quotient_certificate(square, rng):
    ps = uniform_grid(square, 9)
    delta = 1.0
    base = wendland(3)
    prob = PROBLEMS["poisson_dirichlet"]
    asm = Assembler(base, prob, normalization="plain", beta=0.0)
    band = np.nonzero(square.boundary_distance(ps.points) < delta)[0]
    B = asm.boundary_normal_gram(ps, delta, subset=band)
    D = asm.gradient_gram(ps, delta, subset=band)
    lam = float(la.eigvalsh(B, D)[-1])
    for _ in range(100):
        v = rng.standard_normal(len(band))
        assert v @ B @ v <= lam * (v @ D @ v) * (1 + 1e-8)


def test_penalized_matrix_positive_definite(square, poisson):
    ps = uniform_grid(square, 5)
    delta = 1.0
    par = estimate_beta((ps, delta), square)
    A = assemble_stiffness((ps, delta), poisson, beta=par.beta).toarray()
    assert np.min(np.linalg.eigvalsh(A)) > 0


def test_beta_schedule_uses_finest_level(square):
    sched = LevelSchedule.from_grids(square, [5, 9], deltas=[2.0, 1.0])
    par = beta_schedule(sched)
    single = estimate_beta((sched[1].points, sched[1].delta), square)
    assert par.beta == pytest.approx(single.beta)
    assert par.lambda_max == pytest.approx(single.lambda_max)


def test_beta_grows_toward_finer_levels(square):
    # regression snapshot of the empirical sweep: the finest level dominates
    coarse = estimate_beta((uniform_grid(square, 5), 2.0), square)
    fine = estimate_beta((uniform_grid(square, 9), 1.0), square)
    assert fine.beta >= coarse.beta
