import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hons import dynamics as D
from hons import invariants as I
from hons.dispersion import PhysicsParams
from hons.grid import PairState, PeriodicGrid, SpectralField, random_field, to_physical

UNIT = PhysicsParams(q=1.3, gamma=2.0, beta=0.7, mu=0.4, alpha=0.9)


def smooth_state(n, seed, amp=0.3, kmax=4):
    rng = np.random.default_rng(seed)
    g = PeriodicGrid(n)
    return PairState(random_field(g, rng, 3.0, kmax, amp), random_field(g, rng, 3.0, kmax, amp))


def test_I1_examples():
    g = PeriodicGrid(16)
    e1 = PairState(SpectralField.from_modes(g, {1: 1}), SpectralField.zeros(g))
    assert I.compute_I1(e1) == pytest.approx(2 * np.pi)
    z = PairState(SpectralField.zeros(g), SpectralField.zeros(g))
    assert I.compute_I1(z) == 0


@given(seed=st.integers(0, 2**32 - 1), lam=st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3))
def test_I1_scaling_and_sign(seed, lam):
    s = smooth_state(16, seed)
    scaled = PairState(s.u * lam, s.w * lam)
    a, b = I.compute_I1(s), I.compute_I1(scaled)
    assert a >= 0
    assert b == pytest.approx(abs(lam) ** 2 * a, rel=1e-13)


def test_I2_examples():
    g = PeriodicGrid(16)
    z = PairState(SpectralField.zeros(g), SpectralField.zeros(g))
    assert I.compute_I2(z, UNIT) == 0
    e1 = PairState(SpectralField.from_modes(g, {1: 1}), SpectralField.zeros(g))
    p = PhysicsParams(q=1.0, gamma=2.0, beta=1.0, alpha=0.0, mu=0.0)
    assert I.compute_I2(e1, p) == pytest.approx(9 * np.pi, rel=1e-14)


@given(seed=st.integers(0, 2**32 - 1))
def test_I2_real_and_swap_symmetric(seed):
    s = smooth_state(32, seed, amp=1.0, kmax=10)
    terms = I.i2_terms(s, UNIT)
    tot = complex(np.sum(terms))
    assert abs(tot.imag) <= 1e-12 * (1 + abs(tot.real))
    assert I.compute_I2(s.swapped(), UNIT) == pytest.approx(I.compute_I2(s, UNIT), rel=1e-13)


def test_functionals_against_quadrature():
    s = smooth_state(16, 3, amp=0.8)
    g = s.grid
    k = g.wavenumbers
    P0, P1, P2, P3 = I.functionals(s)
    m = np.abs(s.u.coeffs) ** 2 + np.abs(s.w.coeffs) ** 2
    assert P0 == pytest.approx(2 * np.pi * np.sum(k * m), rel=1e-13)
    assert P1 == pytest.approx(2 * np.pi * np.sum(k**2 * m), rel=1e-13)
    # quartic integrals by a fine rectangle rule (exact for trigonometric polynomials)
    x = np.linspace(0, 2 * np.pi, 256, endpoint=False)
    ev = lambda f: np.exp(1j * np.outer(x, k)) @ f.coeffs
    U, W = ev(s.u), ev(s.w)
    integ = lambda v: 2 * np.pi * np.mean(v)
    assert P2 == pytest.approx(0.5 * integ(np.abs(U) ** 4 + np.abs(W) ** 4), rel=1e-12)
    assert P3 == pytest.approx(integ(np.abs(U) ** 2 * np.abs(W) ** 2), rel=1e-12)


def test_H_examples():
    g = PeriodicGrid(16)
    z = PairState(SpectralField.zeros(g), SpectralField.zeros(g))
    np.testing.assert_array_equal(I.compute_all_H(z, UNIT), np.zeros(4))
    s = smooth_state(16, 4)
    assert I.compute_H(s, UNIT.replace(mu=0.0), 0) == 0
    # real-valued fields: Hermitian-symmetric coefficients
    u = s.u.coeffs + s.u.conj().coeffs
    w = s.w.coeffs + s.w.conj().coeffs
    real = PairState.from_arrays(g, u, w)
    assert np.max(np.abs(to_physical(real.u).imag)) < 1e-14
    assert abs(I.compute_H(real, UNIT, 0)) <= 1e-14
    with pytest.raises(ValueError):
        I.compute_H(s, UNIT.replace(sigma_mu=2.0), 1)
    with pytest.raises(ValueError):
        I.compute_H(s, UNIT, 4)


def test_identities_linear_case():
    s = smooth_state(32, 5)
    p = PhysicsParams(q=1.3, gamma=2.0)
    rep = I.verify_derivative_identities(D.evolve(s, 0.1, 1e-3, p), p)
    assert rep.abs_residual[1] <= 1e-10


def test_identities_converge_at_second_order():
    s = smooth_state(32, 6)
    reps = [I.verify_derivative_identities(D.evolve(s, 0.2, dt, UNIT), UNIT) for dt in (2e-3, 1e-3)]
    orders = np.log2(reps[0].rel_residual / reps[1].rel_residual)
    assert np.all(orders >= 1.9)
    assert reps[1].combination_residual <= 1e-12


def test_identities_require_unit_sigmas():
    s = smooth_state(16, 0)
    tr = D.evolve(s, 0.01, 1e-3, UNIT)
    with pytest.raises(ValueError):
        I.verify_derivative_identities(tr, UNIT.replace(sigma_alpha=0.5))


@pytest.mark.parametrize("params", [UNIT, PhysicsParams(q=3.0, gamma=2.0, beta=2.0, mu=0.0, alpha=1.0)])
def test_energy_conserved(params):
    s = smooth_state(64, 7)
    tr = D.evolve(s, 0.5, 1e-3, params, save_every=50)
    E = np.array([I.compute_energy(x, params) for x in tr.states])
    assert np.max(np.abs(E - E[0])) <= 1e-8 * abs(E[0])


def test_energy_coefficients_guarded():
    with pytest.raises(ValueError):
        I.energy_coefficients(UNIT.replace(sigma_beta=2.0))
    with pytest.raises(ValueError):
        I.energy_coefficients(PhysicsParams(q=1.0, beta=1.0, alpha=1.0, mu=0.0))
    c = I.energy_coefficients(PhysicsParams(q=3.0, gamma=2.0, beta=2.0, alpha=1.0))
    np.testing.assert_allclose(c, [0.0, 3.0, -2.0, -2.0])


def test_sample_row():
    s = smooth_state(16, 8)
    row = I.sample(s, UNIT).row()
    assert len(row) == len(I.CSV_HEADER.split(","))
    assert np.isnan(I.sample(s, UNIT.replace(sigma_alpha=2.0)).H[0])
