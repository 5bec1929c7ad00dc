import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hons import dynamics as D
from hons.dispersion import PhysicsParams
from hons.grid import PairState, PeriodicGrid, SpectralField, random_field, sobolev_norm, to_physical, to_spectral
from hons.reference import PlaneWaveSpec

GENERIC = PhysicsParams(q=1.3, gamma=2.0, beta=0.7, mu=0.4, alpha=0.9, sigma_alpha=1.2, sigma_beta=0.8, sigma_mu=1.7)
RESTRICTED = PhysicsParams(q=1.0, gamma=2.0, beta=1.0, mu=0.5, alpha=1.0, sigma_alpha=1.0, sigma_beta=1.5, sigma_mu=1.0)
LINEAR = PhysicsParams(q=1.3, gamma=2.0)


def smooth_state(n, seed, amp=0.3, kmax=5):
    rng = np.random.default_rng(seed)
    g = PeriodicGrid(n)
    return PairState(random_field(g, rng, 3.0, kmax, amp), random_field(g, rng, 3.0, kmax, amp))


def physical_G1(u, w, p):
    """G1 from pointwise products; exact for band-limited data on a fine enough grid."""
    g = u.grid
    U, W = to_physical(u), to_physical(w)
    Ux = to_physical(SpectralField(g, 1j * g.wavenumbers * u.coeffs))
    Wabs = np.abs(W) ** 2
    dWabs = to_physical(SpectralField(g, 1j * g.wavenumbers * to_spectral(Wabs, g).coeffs))
    mu_, mw = u.mass(), w.mass()
    val = ((p.beta + p.mu) * (np.abs(U) ** 2 - mu_ - mw) * Ux + p.beta * p.sigma_beta * Wabs * Ux
           + p.mu * U**2 * np.conj(Ux) + p.mu * p.sigma_mu * U * dWabs
           - 1j * p.alpha * U * (np.abs(U) ** 2 + p.sigma_alpha * Wabs))
    return to_spectral(val, g).coeffs


# ---------------------------------------------------------------------------
# right-hand sides


def test_F_zero_and_single_mode():
    g = PeriodicGrid(16)
    z = PairState(SpectralField.zeros(g), SpectralField.zeros(g))
    f1, f2 = D.eval_F(z, GENERIC)
    assert not np.any(f1.coeffs) and not np.any(f2.coeffs)
    st_ = PairState(SpectralField.from_modes(g, {1: 1}), SpectralField.zeros(g))
    for mu in (0.0, 0.7, -2.0):
        f1, _ = D.eval_F(st_, PhysicsParams(beta=1.0, alpha=0.0, mu=mu))
        np.testing.assert_allclose(f1.coeffs, 2 * st_.u.coeffs, atol=1e-14)


def test_F_swap_symmetry():
    s = smooth_state(32, 3)
    a = D.eval_F(s, GENERIC)
    b = D.eval_F(s.swapped(), GENERIC)
    assert np.array_equal(a[1].coeffs, b[0].coeffs)


def test_G_zero_and_single_mode():
    g = PeriodicGrid(16)
    z = PairState(SpectralField.zeros(g), SpectralField.zeros(g))
    assert not np.any(D.eval_G(z, GENERIC)[0].coeffs)
    e1 = SpectralField.from_modes(g, {1: 1})
    p = PhysicsParams(q=1.0, beta=0.6, mu=0.4, alpha=0.3)
    g1, g2 = D.eval_G(PairState(e1, SpectralField.zeros(g)), p)
    # |u|^2 equals its mean, so only the mu u^2 conj(u)_x and alpha terms survive
    np.testing.assert_allclose(g1.coeffs, -1j * (p.mu + p.alpha) * e1.coeffs, atol=1e-14)
    assert not np.any(g2.coeffs)


@pytest.mark.parametrize("seed", range(5))
def test_G_matches_pointwise_oracle(seed):
    # modes |k| <= 3 on N = 32: every product stays below the Nyquist band
    s = smooth_state(32, seed, amp=0.5, kmax=3)
    g1, g2 = D.eval_G(s, GENERIC)
    np.testing.assert_allclose(g1.coeffs, physical_G1(s.u, s.w, GENERIC), atol=1e-13)
    np.testing.assert_allclose(g2.coeffs, physical_G1(s.w, s.u, GENERIC), atol=1e-13)


@pytest.mark.parametrize("seed", range(5))
def test_G_is_half_i_F_minus_gauge_transport(seed):
    s = smooth_state(32, seed, amp=1.0, kmax=15)
    p = GENERIC
    c0 = (p.beta + p.mu) * (s.u.mass() + s.w.mass())
    ik = 1j * s.grid.wavenumbers
    g1, g2 = D.eval_G(s, p)
    f1, f2 = D.eval_F(s, p)
    np.testing.assert_allclose(g1.coeffs, 0.5j * f1.coeffs - c0 * ik * s.u.coeffs, atol=1e-12)
    np.testing.assert_allclose(g2.coeffs, 0.5j * f2.coeffs - c0 * ik * s.w.coeffs, atol=1e-12)


def test_restricted_form_agrees_and_is_guarded(rng):
    g = PeriodicGrid(32)
    for _ in range(10):
        s = PairState(random_field(g, rng, 1.0), random_field(g, rng, 1.0))
        a, b = D.eval_G(s, RESTRICTED), D.eval_G_restricted(s, RESTRICTED)
        scale = max(np.max(np.abs(a[0].coeffs)), 1.0)
        assert np.max(np.abs(a[0].coeffs - b[0].coeffs)) <= 1e-12 * scale
        assert np.max(np.abs(a[1].coeffs - b[1].coeffs)) <= 1e-12 * scale
    with pytest.raises(ValueError):
        D.eval_G_restricted(s, GENERIC)


# ---------------------------------------------------------------------------
# linear group


def test_apply_linear_examples():
    s = smooth_state(16, 1)
    assert D.apply_linear(s, 0.0, GENERIC.replace(c0=0.3)).u.equals(s.u)
    g = PeriodicGrid(16)
    e1 = PairState(SpectralField.from_modes(g, {1: 1}), SpectralField.zeros(g))
    for t in (0.3, 2.0):
        out = D.apply_linear(e1, t, PhysicsParams(q=1.0, c0=0.0))
        np.testing.assert_allclose(to_physical(out.u), np.exp(1j * (g.x + 0.5 * t)), atol=1e-14)


@given(seed=st.integers(0, 2**32 - 1), t=st.floats(-50, 50), s=st.sampled_from([0.0, 0.5, 1.0, 2.0]),
       q=st.floats(-5, 5), c0=st.floats(-5, 5))
def test_apply_linear_unitary(seed, t, s, q, c0):
    rng = np.random.default_rng(seed)
    g = PeriodicGrid(64)
    st0 = PairState(random_field(g, rng), random_field(g, rng))
    out = D.apply_linear(st0, t, PhysicsParams(q=q, c0=c0))
    for a, b in ((st0.u, out.u), (st0.w, out.w)):
        n0 = sobolev_norm(a.coeffs, g, s)
        assert abs(sobolev_norm(b.coeffs, g, s) - n0) <= 1e-13 * n0


# ---------------------------------------------------------------------------
# stepping


def test_phi_functions_continuous_at_switch():
    thr = D.PHI_SERIES_THRESHOLD
    inside = np.array([thr * (1 - 1e-9), 1j * thr * (1 - 1e-9)])
    outside = np.array([thr * (1 + 1e-9), 1j * thr * (1 + 1e-9)])
    for a, b in zip(D.phi_functions(inside), D.phi_functions(outside)):
        np.testing.assert_allclose(a, b, rtol=1e-8)
    p1, p2, p3 = D.phi_functions(np.array([0.0]))
    assert (p1[0], p2[0], p3[0]) == pytest.approx((1.0, 0.5, 1.0 / 6.0))


def test_step_linear_and_zero():
    s = smooth_state(32, 2)
    p = LINEAR.replace(c0=0.0)
    a = D.step(s, 0.01, p)
    b = D.apply_linear(s, 0.01, p)
    assert np.max(np.abs(a.u.coeffs - b.u.coeffs)) <= 1e-13
    g = s.grid
    z = PairState(SpectralField.zeros(g), SpectralField.zeros(g))
    assert not np.any(D.step(z, 0.01, GENERIC).u.coeffs)


def test_step_argument_checks():
    s = smooth_state(16, 0)
    with pytest.raises(ValueError):
        D.step(s, 0.0, GENERIC)
    with pytest.raises(ValueError):
        D.step(s, 0.01, GENERIC, scheme="rk4")
    with pytest.raises(ValueError):
        D.step(s, 0.01, GENERIC, formulation="other")


def test_plane_wave_local_error_fifth_order():
    p = PhysicsParams(q=1.0, gamma=2.0, beta=1.0, alpha=0.3)
    g = PeriodicGrid(32)
    spec = PlaneWaveSpec(0.5, 3, p)
    errs = []
    for dt in (0.02, 0.01):
        out = D.step(spec.state(g), dt, p, formulation="direct")
        errs.append(np.max(np.abs(to_physical(out.u) - spec.samples(g.x, dt)[0])))
    assert np.log2(errs[0] / errs[1]) >= 4.5


def test_evolve_linear_matches_group():
    s = smooth_state(32, 4)
    tr = D.evolve(s, 1.0, 0.01, LINEAR)
    exact = D.apply_linear(s, 1.0, tr.params)
    assert np.max(np.abs(tr.final.u.coeffs - exact.u.coeffs)) <= 1e-12


def test_evolve_records_and_validates():
    s = smooth_state(16, 5)
    tr = D.evolve(s, 0.1, 0.01, GENERIC, save_every=3)
    np.testing.assert_allclose(tr.times, [0.0, 0.03, 0.06, 0.09, 0.1], atol=1e-15)
    assert [st_.time for st_ in tr.states] == pytest.approx(list(tr.times))
    assert len(tr) == 5
    with pytest.raises(ValueError):
        D.evolve(s, 0.1, 0.03, GENERIC)
    with pytest.raises(ValueError):
        D.evolve(s, 0.1, 0.01, GENERIC, save_every=0)


def test_invariant_subspace_and_swap():
    s = smooth_state(32, 6)
    z = PairState(s.u, SpectralField.zeros(s.grid))
    tr = D.evolve(z, 0.2, 1e-3, GENERIC, save_every=50)
    assert max(np.max(np.abs(x.w.coeffs)) for x in tr.states) <= 1e-12
    sym = PhysicsParams(q=1.3, gamma=2.0, beta=0.7, mu=0.4, alpha=0.9, sigma_beta=0.8)
    a = D.evolve(s, 0.2, 1e-3, sym).final
    b = D.evolve(s.swapped(), 0.2, 1e-3, sym).final
    assert np.array_equal(a.u.coeffs, b.w.coeffs) and np.array_equal(a.w.coeffs, b.u.coeffs)


def test_forward_backward():
    s = smooth_state(32, 7)
    errs = []
    for dt in (2e-3, 1e-3):
        fwd = D.evolve(s, 0.2, dt, GENERIC).final
        back = D.evolve(fwd, -0.2, -dt, GENERIC).final
        errs.append(np.max(np.abs(back.u.coeffs - s.u.coeffs)))
    assert errs[1] <= 1e-9
    assert errs[0] / errs[1] >= 12  # the defect is integrator error, shrinking at high order
    assert back.time == pytest.approx(0.0, abs=1e-14)


def test_blowup_carries_partial_trajectory():
    g = PeriodicGrid(32)
    rng = np.random.default_rng(0)
    s = PairState(random_field(g, rng, 0.0, 15, 200.0), random_field(g, rng, 0.0, 15, 200.0))
    with pytest.raises(D.BlowUpError) as info:
        D.evolve(s, 1.0, 0.01, GENERIC, save_every=10)
    err = info.value
    assert err.trajectory is not None and len(err.trajectory.states) >= 1
    assert err.time > 0


def test_gauged_and_direct_agree():
    s = smooth_state(32, 8)
    a = D.evolve(s, 0.3, 1e-3, GENERIC, save_every=10**6).final
    b = D.evolve(s, 0.3, 1e-3, GENERIC, save_every=10**6, formulation="direct").final
    assert np.max(np.abs(to_physical(a.u) - to_physical(b.u))) <= 1e-6


# ---------------------------------------------------------------------------
# Duhamel / Picard


def test_cumulative_quadrature_order():
    errs = []
    for m in (33, 65):
        t = np.linspace(0.0, 1.0, m)
        got = D.cumulative_quad4(np.exp(2j * t), t[1] - t[0])
        errs.append(np.max(np.abs(got - (np.exp(2j * t) - 1) / 2j)))
    assert got[0] == 0
    assert np.log2(errs[0] / errs[1]) >= 3.8


def test_picard_zero_and_linear():
    g = PeriodicGrid(16)
    z = PairState(SpectralField.zeros(g), SpectralField.zeros(g))
    rep = D.picard_solve(z, 0.05, 17, 10, 1e-13, GENERIC)
    assert rep.converged and rep.n_iterations == 1
    s = smooth_state(16, 9)
    rep = D.picard_solve(s, 0.05, 17, 10, 1e-13, LINEAR)
    assert rep.converged and rep.n_iterations == 1
    exact = D.apply_linear(s, 0.05, LINEAR)
    np.testing.assert_allclose(rep.state_at(-1).u.coeffs, exact.u.coeffs, atol=1e-14)


def test_picard_argument_checks():
    s = smooth_state(16, 0)
    with pytest.raises(ValueError):
        D.picard_solve(s, 0.05, 4, 10, 1e-12, GENERIC)
    with pytest.raises(ValueError):
        D.picard_solve(s, -0.05, 17, 10, 1e-12, GENERIC)


def test_picard_matches_evolve():
    s = smooth_state(32, 10, amp=0.05)
    rep = D.picard_solve(s, 0.05, 129, 30, 1e-13, RESTRICTED)
    assert rep.converged and rep.contracting
    ev = D.evolve(s, 0.05, 1e-4, RESTRICTED).final
    assert np.max(np.abs(to_physical(rep.state_at(-1).u) - to_physical(ev.u))) <= 1e-6
    for k, r in enumerate(rep.contraction_ratios):
        assert r == pytest.approx(rep.distances[k + 1] / rep.distances[k])
