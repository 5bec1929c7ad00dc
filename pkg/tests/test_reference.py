import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hons import dynamics as D
from hons import invariants as I
from hons import reference as R
from hons.dispersion import PhysicsParams
from hons.grid import PairState, PeriodicGrid, SpectralField, random_field, to_physical

BASE = PhysicsParams(q=1.0, gamma=2.0, beta=1.0, alpha=0.0)
RL = PhysicsParams(q=6.0, gamma=2.0, beta=1.0, alpha=1.0, mu=0.5)


def substitution_residual(spec, grid, t=0.4):
    """Residual of 2i u_t + q u_xx + i gamma u_xxx - F1 using spectral derivatives and eval_F."""
    p = spec.params
    st_ = spec.state(grid, t)
    k = grid.wavenumbers
    wu, ww = spec.omegas
    F1, F2 = D.eval_F(st_, p)
    out = 0.0
    for f, om, F in ((st_.u, wu, F1), (st_.w, ww, F2)):
        lhs = (2j * (-1j * om) + p.q * (1j * k) ** 2 + 1j * p.gamma * (1j * k) ** 3) * f.coeffs
        out = max(out, np.max(np.abs(lhs - F.coeffs)))
    return out


def test_omega_examples():
    assert R.plane_wave_omega(0.7, 0, BASE) == 0
    p = PhysicsParams(q=1.3, gamma=2.0, beta=0.8, alpha=0.4)
    assert R.plane_wave_omega(1e-9, 3, p) == pytest.approx(0.5 * 1.3 * 9 - 27, rel=1e-12)
    assert R.plane_wave_omega(1.0, 1, BASE) == pytest.approx(0.5)
    assert R.plane_wave_residual(R.PlaneWaveSpec(1.0, 1, BASE)) <= 1e-12


@pytest.mark.parametrize("coupled", [False, True])
def test_omega_sweep(coupled):
    g = PeriodicGrid(32)
    p = PhysicsParams(q=1.3, gamma=1.7, beta=0.8, mu=0.6, alpha=0.4, sigma_alpha=1.3, sigma_beta=0.6, sigma_mu=2.0)
    for k in np.linspace(-8, 8, 10).round().astype(int):
        for A in np.linspace(0.1, 2.0, 10):
            spec = R.PlaneWaveSpec(A * np.exp(0.3j), int(k), p, B=(0.5 - 0.2j) * A if coupled else 0.0)
            scale = 1 + abs(k) ** 3 + A**3 * (1 + abs(k))
            assert R.plane_wave_residual(spec) <= 1e-12 * scale
            assert substitution_residual(spec, g) <= 1e-12 * scale


def test_rl_identity_and_inverse(rng):
    g = PeriodicGrid(32)
    s = PairState(random_field(g, rng), random_field(g, rng), 0.37)
    p0 = PhysicsParams(q=0.0, gamma=2.0, beta=1.0, alpha=0.0)
    out = R.rl_transform(s, p0)
    np.testing.assert_allclose(out.u.coeffs, s.u.coeffs, atol=1e-15)
    back = R.rl_transform(R.rl_transform(s, RL), RL, "inverse")
    np.testing.assert_allclose(back.u.coeffs, s.u.coeffs, atol=1e-13)
    np.testing.assert_allclose(back.w.coeffs, s.w.coeffs, atol=1e-13)


@given(seed=st.integers(0, 2**32 - 1), t=st.floats(-10, 10))
def test_rl_preserves_I1(seed, t):
    rng = np.random.default_rng(seed)
    g = PeriodicGrid(32)
    s = PairState(random_field(g, rng, 2.0, 10), random_field(g, rng, 2.0, 10), t)
    assert I.compute_I1(R.rl_transform(s, RL)) == pytest.approx(I.compute_I1(s), rel=1e-13)


def test_rl_rejections():
    g = PeriodicGrid(16)
    s = PairState(SpectralField.from_modes(g, {1: 1}), SpectralField.zeros(g))
    with pytest.raises(ValueError, match="not an integer"):
        R.rl_transform(s, PhysicsParams(q=3.0, gamma=2.0, beta=2.0, alpha=1.0))
    with pytest.raises(ValueError):
        R.rl_transform(s, RL.replace(alpha=2.0))
    with pytest.raises(ValueError):
        R.rl_transform(s, RL.replace(sigma_alpha=0.5))
    with pytest.raises(ValueError):
        R.rl_transform(s, RL, "sideways")


def test_rl_cross_solve():
    g = PeriodicGrid(32)
    rng = np.random.default_rng(9)
    s1 = PairState(random_field(g, rng, 4.0, 4, 0.3), random_field(g, rng, 4.0, 4, 0.3))
    red = D.evolve(s1, 0.2, 1e-3, R.reduced_params(RL), save_every=10**6).final
    full = D.evolve(R.rl_transform(s1, RL), 0.2, 1e-3, RL, save_every=10**6).final
    got = R.rl_transform(red, RL)
    assert np.max(np.abs(to_physical(got.u) - to_physical(full.u))) <= 1e-8


def test_single_equation_stepper():
    g = PeriodicGrid(32)
    p = PhysicsParams(q=1.0, gamma=2.0, beta=1.0, mu=0.5, alpha=0.8)
    z = SpectralField.zeros(g)
    assert not np.any(R.single_equation_step(z, 0.01, p).coeffs)
    spec = R.PlaneWaveSpec(0.5, 3, p)
    out = R.single_equation_evolve(spec.state(g).u, 0.5, 1e-3, p)
    np.testing.assert_allclose(to_physical(out), spec.samples(g.x, 0.5)[0], atol=1e-10)
    u0 = random_field(g, np.random.default_rng(1), 4.0, 6, 0.3)
    a = R.single_equation_evolve(u0, 0.2, 5e-4, p)
    b = D.evolve(PairState(u0, z), 0.2, 5e-4, p, save_every=10**6).final.u
    assert np.max(np.abs(to_physical(a) - to_physical(b))) <= 1e-10


def test_mkdv_limit():
    g = PeriodicGrid(64)
    p = PhysicsParams(q=0.0, gamma=2.0, beta=1.0, mu=0.5, alpha=0.0)
    v0 = 0.5 * np.cos(g.x) + 0.2 * np.sin(2 * g.x) + 0.1
    s = PairState(SpectralField(g, np.fft.fft(v0) / g.n_modes), SpectralField.zeros(g))
    T, dt = 0.2, 1e-3
    out = D.evolve(s, T, dt, p, save_every=10**6, formulation="direct").final
    ref = R.mkdv_evolve(v0, T, dt, p.gamma, p.beta + 2 * p.mu)
    U = to_physical(out.u)
    assert np.max(np.abs(U.imag)) <= 1e-12
    assert np.max(np.abs(U - ref)) <= 1e-8
