import numpy as np
import pytest

from mesharc.kernels import ScaledKernel, WendlandKernel, kernel_gradient, kernel_value, wendland


def horner_reference(r):
    """Independent evaluation of the C6 member used to pin the table values."""
    if r >= 1:
        return 0.0
    p = ((32.0 * r + 25.0) * r + 8.0) * r + 1.0
    q = (1.0 - r) ** 2
    q = q * q
    q = q * q
    return q * p


def test_c6_point_values():
    k = wendland(3)
    assert k.phi(0.0) == 1.0
    assert k.phi(1.0) == 0.0
    assert k.phi(2.3) == 0.0
    # 0.5^8 * (32/8 + 25/4 + 4 + 1) = 15.25/256, cross-checked by the
    # Horner-form oracle
    assert k.phi(0.5) == pytest.approx(15.25 / 256, rel=1e-15)
    assert k.phi(0.5) == pytest.approx(horner_reference(0.5), rel=1e-15)
    assert abs(k.phi(0.5) - 5.9570e-2) < 1e-6


def test_c2_point_values():
    k = wendland(1)
    assert k.phi(0.0) == 1.0
    assert k.phi(1.0) == 0.0
    assert k.phi(0.5) == pytest.approx(0.5**4 * 3.0, rel=1e-15)


def test_sobolev_orders():
    assert wendland(3).sobolev_order == 4.5
    assert wendland(1).sobolev_order == 2.5
    assert wendland(3, dimension=3).sobolev_order == 5.0


def test_bad_parameters_rejected():
    with pytest.raises(ValueError):
        WendlandKernel(smoothness=2)
    with pytest.raises(ValueError):
        WendlandKernel(dimension=0)
    with pytest.raises(ValueError):
        wendland(3).phi(-0.1)
    with pytest.raises(ValueError):
        wendland(1).dphi(np.array([0.2, -0.5]))


def test_derivative_endpoints():
    for k in (wendland(1), wendland(3)):
        assert k.dphi(0.0) == 0.0
        assert k.dphi(1.0) == 0.0
        assert k.dphi(1.7) == 0.0


@pytest.mark.parametrize("smoothness", [1, 3])
def test_derivative_matches_finite_differences(smoothness):
    k = wendland(smoothness)
    rs = np.linspace(1e-3, 0.99, 211)
    h = 1e-6
    fd = (k.phi(rs + h) - k.phi(rs - h)) / (2 * h)
    rel = np.abs(fd - k.dphi(rs)) / np.abs(k.dphi(rs))
    assert np.max(rel) <= 1e-6


def test_derivative_vanishes_to_high_order_at_support_edge():
    k = wendland(3)
    for eps in (1e-2, 1e-3):
        # degree-7 factor: |phi'(1-eps)| <= 528 eps^7 << eps^6
        assert abs(k.dphi(1.0 - eps)) <= 530 * eps**7


def test_dphi_over_r_extends_smoothly_through_zero():
    for k in (wendland(1), wendland(3)):
        vals = k.dphi_over_r(np.array([0.0, 1e-12, 1e-6]))
        assert vals[0] == pytest.approx(vals[2], rel=1e-4)
        small = 1e-8
        assert k.dphi(small) / small == pytest.approx(k.dphi_over_r(small), rel=1e-6)


def test_scaled_kernel_values():
    base = wendland(3)
    native = ScaledKernel(base, 1.0, "native")
    assert kernel_value(native, np.zeros(2), np.zeros(2)) == 1.0
    half = ScaledKernel(base, 0.5, "native")
    assert kernel_value(half, np.zeros(2), np.zeros(2)) == pytest.approx(4.0)
    plain2 = ScaledKernel(base, 2.0, "plain")
    x = np.array([1.0, 0.0])
    assert kernel_value(plain2, x, np.zeros(2)) == pytest.approx(15.25 / 256)


def test_compact_support_is_exact():
    sk = ScaledKernel(wendland(3), 0.7, "native")
    y = np.zeros(2)
    for r in (0.7, 0.7000001, 1.0, 35.0):
        x = np.array([r, 0.0])
        assert kernel_value(sk, x, y) == 0.0
        assert np.all(kernel_gradient(sk, x, y) == 0.0)


def test_normalization_prefactor_is_exact():
    base = wendland(3)
    x = np.array([0.2, -0.1])
    y = np.array([-0.3, 0.25])
    for delta in (0.5, 1.0, 2.0):
        native = ScaledKernel(base, delta, "native")
        plain = ScaledKernel(base, delta, "plain")
        assert kernel_value(native, x, y) == delta ** (-2) * kernel_value(plain, x, y)


def test_gradient_zero_at_coincident_points():
    sk = ScaledKernel(wendland(3), 1.3, "native")
    g = kernel_gradient(sk, np.array([0.4, 0.4]), np.array([0.4, 0.4]))
    assert np.all(g == 0.0)


def test_gradient_matches_finite_differences(rng):
    sk = ScaledKernel(wendland(3), 0.9, "plain")
    h = 1e-6
    for _ in range(25):
        x = rng.uniform(-0.5, 0.5, 2)
        y = rng.uniform(-0.5, 0.5, 2)
        r = np.hypot(*(x - y))
        if r < 1e-3 or r > 0.85:
            continue
        g = kernel_gradient(sk, x, y)
        for c in range(2):
            e = np.zeros(2)
            e[c] = h
            fd = (kernel_value(sk, x + e, y) - kernel_value(sk, x - e, y)) / (2 * h)
            assert fd == pytest.approx(g[c], rel=1e-6, abs=1e-9)


def test_gradient_rotation_equivariance(rng):
    sk = ScaledKernel(wendland(3), 1.1, "native")
    for _ in range(10):
        x = rng.uniform(-0.5, 0.5, 2)
        y = rng.uniform(-0.5, 0.5, 2)
        th = rng.uniform(0, 2 * np.pi)
        R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        g_rot = kernel_gradient(sk, R @ x, R @ y)
        assert np.allclose(g_rot, R @ kernel_gradient(sk, x, y), atol=1e-12)


def test_gram_matrices_positive_definite(rng):
    sk = ScaledKernel(wendland(3), 1.0, "plain")
    checked = 0
    while checked < 20:
        n = int(rng.integers(2, 11))
        pts = rng.uniform(-1, 1, (n, 2))
        d = np.linalg.norm(pts[:, None] - pts[None, :], axis=2) + 2 * np.eye(n)
        if d.min() < 1e-3:
            continue
        gram = sk.value(pts[:, None, :], pts[None, :, :])
        assert np.min(np.linalg.eigvalsh(gram)) > 0
        checked += 1
