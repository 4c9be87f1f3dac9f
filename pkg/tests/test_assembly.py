import numpy as np
import pytest
import scipy.sparse as sp

from mesharc.assembly import (
    PROBLEMS,
    Assembler,
    ProblemSpec,
    StiffnessSystem,
    assemble_cross,
    assemble_load,
    assemble_stiffness,
    dense_oracle_matrix,
    export_coo,
    zero_field,
)
from mesharc.geometry import PointSet, uniform_grid
from mesharc.kernels import ScaledKernel, wendland
from mesharc.quadrature import QuadratureSpec, domain_edges, edge_window, integrate_boundary, integrate_box

TWO_PI = 2 * np.pi
INT_R_PHI = 0.04487179487179487
INT_R_PHI_SQ = 0.022860860591376143
INT_R_DPHI_SQ = 0.5062951496388028


def test_problem_spec_validation(square):
    with pytest.raises(ValueError):
        ProblemSpec("poisson_dirichlet", f=lambda p: 0 * p[..., 0], domain=square)
    with pytest.raises(ValueError):
        ProblemSpec(
            "helmholtz_neumann",
            f=lambda p: 0 * p[..., 0],
            domain=square,
            g=zero_field,
        )
    with pytest.raises(ValueError):
        ProblemSpec("diffusion", f=lambda p: 0 * p[..., 0], domain=square)


def test_single_interior_centre_helmholtz():
    # 1x1 matrix equals the closed-form gradient plus mass integrals; the
    # support lies strictly inside the domain so the radial constants apply
    prob = PROBLEMS["helmholtz_neumann"]
    ps = PointSet(np.array([[0.0, 0.0]]))
    delta = 0.5
    A = assemble_stiffness((ps, delta), prob, normalization="plain").toarray()
    want = TWO_PI * INT_R_DPHI_SQ + delta**2 * TWO_PI * INT_R_PHI_SQ
    assert A[0, 0] == pytest.approx(want, abs=1e-9)
    assert A[0, 0] > 0


def test_far_centres_structurally_zero(square, helmholtz):
    ps = PointSet(np.array([[-0.8, -0.8], [0.8, 0.8]]))
    A = assemble_stiffness((ps, 0.5), helmholtz)
    assert A[0, 1] == 0.0 and A[1, 0] == 0.0
    assert A.nnz == 2  # only the diagonal survives


def test_assembly_matches_dense_oracle_helmholtz(square, helmholtz):
    ps = uniform_grid(square, 3)
    sk = ScaledKernel(wendland(3), 1.0, "plain")
    A = assemble_stiffness((ps, sk), helmholtz).toarray()
    ref = dense_oracle_matrix(ps.points, sk, helmholtz)
    assert np.max(np.abs(A - ref)) <= 1e-8 * np.max(np.abs(ref))


def test_assembly_matches_dense_oracle_dirichlet(square, poisson):
    ps = uniform_grid(square, 3)
    sk = ScaledKernel(wendland(3), 1.0, "plain")
    beta = 50.0
    A = assemble_stiffness((ps, sk), poisson, beta=beta).toarray()
    ref = dense_oracle_matrix(ps.points, sk, poisson, beta=beta)
    assert np.max(np.abs(A - ref)) <= 1e-8 * np.max(np.abs(ref))


def test_dirichlet_requires_beta(square, poisson):
    ps = uniform_grid(square, 3)
    with pytest.raises(ValueError):
        assemble_stiffness((ps, 1.0), poisson)


def test_symmetry_exact(square, helmholtz):
    ps = uniform_grid(square, 5)
    A = assemble_stiffness((ps, 2.0), helmholtz)
    assert (A != A.T).nnz == 0


def test_positive_definite_small_levels(square, helmholtz, poisson):
    for prob, beta in ((helmholtz, None), (poisson, 120.0)):
        ps = uniform_grid(square, 5)
        A = assemble_stiffness((ps, 1.0), prob, beta=beta).toarray()
        assert np.min(np.linalg.eigvalsh(A)) > 0


def test_native_is_scaled_plain(square, helmholtz):
    ps = uniform_grid(square, 5)
    delta = 1.0
    plain = assemble_stiffness((ps, ScaledKernel(wendland(3), delta, "plain")), helmholtz)
    native = assemble_stiffness((ps, ScaledKernel(wendland(3), delta, "native")), helmholtz)
    scale = delta ** (-4)
    diff = np.abs(native.toarray() - scale * plain.toarray())
    assert np.max(diff) <= 1e-12 * np.max(np.abs(native.toarray()))


def test_cross_consistency_same_level(square, helmholtz):
    ps = uniform_grid(square, 5)
    A = assemble_stiffness((ps, 1.0), helmholtz).toarray()
    C = assemble_cross((ps, 1.0), (ps, 1.0), helmholtz).toarray()
    assert np.allclose(A, C, rtol=0, atol=1e-14 * np.max(np.abs(A)))


def test_cross_matches_dense_oracle(square, helmholtz):
    coarse = uniform_grid(square, 3)
    fine = uniform_grid(square, 5)
    sk_c = ScaledKernel(wendland(3), 1.2, "plain")
    sk_f = ScaledKernel(wendland(3), 0.7, "plain")
    C = assemble_cross((fine, sk_f), (coarse, sk_c), helmholtz).toarray()
    ref = dense_oracle_matrix(
        fine.points, sk_f, helmholtz, sk_b=sk_c, points_b=coarse.points
    )
    assert np.max(np.abs(C - ref)) <= 1e-8 * np.max(np.abs(ref))


def test_cross_disjoint_entry_zero(square, helmholtz):
    a = PointSet(np.array([[-0.9, -0.9]]))
    b = PointSet(np.array([[0.9, 0.9]]))
    C = assemble_cross((a, 0.4), (b, 0.4), helmholtz)
    assert C.nnz == 0


def test_load_zero_source(square):
    prob = ProblemSpec("helmholtz_neumann", f=zero_field, domain=square)
    ps = uniform_grid(square, 3)
    assert np.all(assemble_load((ps, 1.0), prob) == 0.0)


def test_load_constant_source_interior_support(square):
    prob = ProblemSpec(
        "helmholtz_neumann", f=lambda p: np.ones(p.shape[:-1]), domain=square
    )
    ps = PointSet(np.array([[0.0, 0.0]]))
    delta = 0.5
    load = assemble_load((ps, ScaledKernel(wendland(3), delta, "plain")), prob)
    assert load[0] == pytest.approx(delta**2 * TWO_PI * INT_R_PHI, abs=1e-10)


def test_dirichlet_load_boundary_terms_with_nonzero_g(square):
    # synthetic nonzero Dirichlet data exercises the two boundary terms
    beta = 40.0
    g = lambda p: p[..., 0] + 2.0
    prob = ProblemSpec(
        "poisson_dirichlet", f=zero_field, domain=square, g=g
    )
    delta = 0.5
    centre = np.array([0.0, -1.0])
    ps = PointSet(centre[None, :])
    sk = ScaledKernel(wendland(3), delta, "plain")
    load = assemble_load((ps, sk), prob, beta=beta)

    def integrand(p, normal):
        d = p - centre
        r = np.sqrt((d * d).sum(axis=1))
        u = r / delta
        phi = sk.base.phi(u)
        dn = sk.base.dphi_over_r(u) / delta**2 * (d @ normal)
        return g(p) * (beta * phi - dn)

    want = integrate_boundary(integrand, square, centre, delta).value
    assert load[0] == pytest.approx(want, rel=1e-10)


def test_variational_consistency_dirichlet(square, poisson):
    # a_D(u, basis_i) == l_D(basis_i) for the exact solution, up to
    # quadrature tolerance
    beta = 80.0
    ps = uniform_grid(square, 5)
    delta = 1.0
    sk = ScaledKernel(wendland(3), delta, "plain")
    spec = QuadratureSpec()
    load = assemble_load((ps, sk), poisson, beta=beta, spec=spec)

    exact = poisson.exact
    h = 1e-6

    def grad_exact(p):
        gx = (exact(p + [h, 0]) - exact(p - [h, 0])) / (2 * h)
        gy = (exact(p + [0, h]) - exact(p - [0, h])) / (2 * h)
        return np.column_stack([gx, gy])

    for i in (0, 2, 12, 24):  # corner, edge and interior centres
        c = ps.points[i]

        def vol(p):
            return (grad_exact(p) * sk.gradient(p, c)).sum(axis=1)

        box = (
            max(c[0] - delta, -1.0), min(c[0] + delta, 1.0),
            max(c[1] - delta, -1.0), min(c[1] + delta, 1.0),
        )
        a_val = integrate_box(vol, box, spec).value

        def bdry(p, normal):
            phi_i = sk.value(p, c)
            dn_u = (grad_exact(p) * normal).sum(axis=1)
            dn_i = sk.gradient(p, c) @ normal
            u = exact(p)
            return -phi_i * dn_u - u * dn_i + beta * u * phi_i

        a_val += integrate_boundary(bdry, square, c, delta, spec).value
        assert abs(a_val - load[i]) <= 1e-7


def test_quadrature_cache_shared_across_levels(square, helmholtz):
    asm = Assembler(wendland(3), helmholtz)
    ps = uniform_grid(square, 5)
    asm.stiffness(ps, 1.0)
    n_keys = len(asm._vol_cache)
    asm.stiffness(ps, 1.0)  # same geometry: no new quadratures
    assert len(asm._vol_cache) == n_keys


def test_stiffness_system_solves_and_caches(square, helmholtz):
    ps = uniform_grid(square, 5)
    A = assemble_stiffness((ps, 1.0), helmholtz)
    rhs = np.arange(len(ps), dtype=float)
    sys_ = StiffnessSystem(A, rhs)
    c = sys_.solve(rhs)
    assert np.max(np.abs(A @ c - rhs)) <= 1e-10 * np.max(np.abs(rhs))
    assert sys_._factor is not None
    assert sys_.solve(rhs) is not c  # new array, same cached factorization


def test_export_coo(tmp_path):
    A = sp.csr_matrix(np.array([[2.0, 0.0], [1.5, 0.0]]))
    path = tmp_path / "matrix.txt"
    export_coo(A, path)
    assert path.read_text() == "0 0 2\n1 0 1.5\n"


def test_edge_window_helper(square):
    bottom = domain_edges(square)[0]
    win = edge_window(bottom, np.array([0.0, -1.0]), 0.25)
    assert win == pytest.approx((-0.25, 0.25))
    assert edge_window(bottom, np.array([0.0, 0.0]), 0.5) is None
