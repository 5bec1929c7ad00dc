"""Conserved quantities, the auxiliary functionals H0..H3 and their time-derivative identities.

Integrals are unnormalised, int_0^{2pi} ... dx.  Products of up to six
factors are evaluated on a 3N-point grid, where the zero mode of a degree-six
trigonometric product of N-mode polynomials has no aliasing, so every
integral below is exact up to rounding.

Two energy-type functionals are provided:

``compute_I2``
    the four-term functional with coefficients
    (i(-3 gamma alpha + beta q + 2 mu q), 3 gamma/2, (beta + 2 mu)/2, beta + 2 mu).
``compute_energy``
    the combination that is actually constant along the flow when all
    sigmas equal 1.  Writing P0 = i int(u conj(u)_x + w conj(w)_x),
    P1 = ||u_x||^2 + ||w_x||^2, P2 = (||u||_4^4 + ||w||_4^4)/2 and
    P3 = int |u|^2 |w|^2, the identities

        dP0/dt = H0,  dP1/dt = -H1,  dP2/dt = -H2,  dP3/dt = -H3

    hold exactly and the combination
    c0 P0 + (3 gamma/2) P1 - (beta + 2 mu)(P2 + P3),
    c0 = (3 gamma alpha - (beta + 2 mu) q) / (2 mu),
    has zero time derivative.  For mu = 0 such a combination exists only when
    q beta = 3 gamma alpha; then P0 is separately conserved and c0 = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dispersion import PhysicsParams
from .grid import TWO_PI, PairState, padded_physical, sobolev_norm

I2_IMAG_TOL = 1e-12


class ConsistencyError(RuntimeError):
    """A quantity that must be real came out with a non-negligible imaginary part."""


def _integral(f: np.ndarray) -> complex:
    return TWO_PI * np.mean(f, axis=-1)


class _Fields:
    """u, w, u_x, w_x and derived densities on the 3N-point quadrature grid."""

    def __init__(self, state: PairState):
        n = state.grid.n_modes
        m = 3 * n
        ik = 1j * state.grid.wavenumbers
        u, w = state.u.coeffs, state.w.coeffs
        self.U = padded_physical(u, m)
        self.W = padded_physical(w, m)
        self.Ux = padded_physical(ik * u, m)
        self.Wx = padded_physical(ik * w, m)
        self.au = np.abs(self.U) ** 2
        self.aw = np.abs(self.W) ** 2
        self.dau = 2.0 * np.real(self.Ux * np.conj(self.U))
        self.daw = 2.0 * np.real(self.Wx * np.conj(self.W))
        self.gu = np.abs(self.Ux) ** 2
        self.gw = np.abs(self.Wx) ** 2

    def S(self) -> float:
        """Im int (u conj(u)_x)^2 + (w conj(w)_x)^2."""
        return float(np.imag(_integral((self.U * np.conj(self.Ux)) ** 2 + (self.W * np.conj(self.Wx)) ** 2)))

    def C(self) -> float:
        """Im int u conj(u)_x w conj(w)_x."""
        return float(np.imag(_integral(self.U * np.conj(self.Ux) * self.W * np.conj(self.Wx))))


def compute_I1(state: PairState) -> float:
    """||u||^2 + ||w||^2 = 2pi sum(|u_hat|^2 + |w_hat|^2)."""
    return float(TWO_PI * (state.u.mass() + state.w.mass()))


def momentum_integral(state: PairState) -> complex:
    """int (u conj(u)_x + w conj(w)_x) dx = 2pi sum (-i n)(|u_hat|^2 + |w_hat|^2); purely imaginary."""
    k = state.grid.wavenumbers
    dens = np.abs(state.u.coeffs) ** 2 + np.abs(state.w.coeffs) ** 2
    return complex(TWO_PI * np.sum(-1j * k * dens))


def functionals(state: PairState) -> np.ndarray:
    """(P0, P1, P2, P3), the quantities differentiated in the H-identities."""
    f = _Fields(state)
    p0 = (1j * momentum_integral(state)).real
    p1 = TWO_PI * float(np.sum(state.grid.wavenumbers.astype(float) ** 2
                               * (np.abs(state.u.coeffs) ** 2 + np.abs(state.w.coeffs) ** 2)))
    p2 = 0.5 * float(np.real(_integral(f.au**2 + f.aw**2)))
    p3 = float(np.real(_integral(f.au * f.aw)))
    return np.array([p0, p1, p2, p3])


def i2_terms(state: PairState, params: PhysicsParams) -> np.ndarray:
    """The four complex terms of the displayed energy functional, in order."""
    p = params
    f = _Fields(state)
    K = -3 * p.gamma * p.alpha + p.beta * p.q + 2 * p.mu * p.q
    return np.array([
        1j * K * momentum_integral(state),
        1.5 * p.gamma * _integral(f.gu + f.gw),
        0.5 * (p.beta + 2 * p.mu) * _integral(f.au**2 + f.aw**2),
        (p.beta + 2 * p.mu) * _integral(f.au * f.aw),
    ])


def compute_I2(state: PairState, params: PhysicsParams, tol: float = I2_IMAG_TOL) -> float:
    """Displayed four-term energy functional; raises ConsistencyError if not real."""
    total = complex(np.sum(i2_terms(state, params)))
    if abs(total.imag) > tol * (1.0 + abs(total.real)):
        raise ConsistencyError(f"I2 has imaginary residue {total.imag:.3e}")
    return total.real


def energy_coefficients(params: PhysicsParams) -> np.ndarray:
    """Coefficients of (P0, P1, P2, P3) in the conserved energy (all sigmas = 1)."""
    p = params
    if not p.unit_sigmas:
        raise ValueError("conserved energy requires sigma_alpha = sigma_beta = sigma_mu = 1")
    g = p.beta + 2 * p.mu
    defect = 3 * p.gamma * p.alpha - g * p.q
    if p.mu != 0:
        c0 = defect / (2 * p.mu)
    elif np.isclose(float(defect), 0.0, atol=1e-14):
        c0 = 0.0
    else:
        raise ValueError("with mu = 0 a conserved energy exists only when q*beta == 3*gamma*alpha")
    return np.array([c0, 1.5 * p.gamma, -g, -g], dtype=float)


def compute_energy(state: PairState, params: PhysicsParams) -> float:
    return float(energy_coefficients(params) @ functionals(state))


def compute_H(state: PairState, params: PhysicsParams, which: int) -> float:
    """H0..H3 with dealiased quartic and sextic integrands; all sigmas must be 1."""
    if not params.unit_sigmas:
        raise ValueError("H functionals are defined for sigma_alpha = sigma_beta = sigma_mu = 1")
    if which not in (0, 1, 2, 3):
        raise ValueError(f"which must be 0..3, got {which!r}")
    return float(_all_H(_Fields(state), params)[which])


def compute_all_H(state: PairState, params: PhysicsParams) -> np.ndarray:
    if not params.unit_sigmas:
        raise ValueError("H functionals are defined for sigma_alpha = sigma_beta = sigma_mu = 1")
    return _all_H(_Fields(state), params)


def _all_H(f: _Fields, p: PhysicsParams) -> np.ndarray:
    b, m, a, q, g = p.beta, p.mu, p.alpha, p.q, p.gamma
    S, C = f.S(), f.C()
    grad_self = float(np.real(_integral(f.gu * f.dau + f.gw * f.daw)))
    grad_cross = float(np.real(_integral(f.gu * f.daw + f.gw * f.dau)))
    sextic = float(np.real(_integral(f.dau * f.aw**2 + f.daw * f.au**2)))
    h0 = 2 * m * S + 4 * m * C
    h1 = (b + 2 * m) * (grad_self + grad_cross) + 4 * a * C + 2 * a * S
    h2 = (-0.5 * b + 2 * m) * sextic + q * S + 1.5 * g * grad_self
    h3 = (0.5 * b - 2 * m) * sextic + 2 * q * C + 1.5 * g * grad_cross
    return np.array([h0, h1, h2, h3], dtype=float)


@dataclass(frozen=True)
class InvariantSample:
    time: float
    I1: float
    I2: float
    H: tuple[float, float, float, float]
    hs_norms: tuple[float, float]

    def row(self) -> list[float]:
        return [self.time, self.I1, self.I2, *self.H, *self.hs_norms]


CSV_HEADER = "t,I1,I2,H0,H1,H2,H3,h1_u,h1_w"


def sample(state: PairState, params: PhysicsParams) -> InvariantSample:
    """Diagnostics of one state; H entries are NaN when the sigmas are not all 1."""
    H = compute_all_H(state, params) if params.unit_sigmas else np.full(4, np.nan)
    g = state.grid
    return InvariantSample(
        time=state.time,
        I1=compute_I1(state),
        I2=compute_I2(state, params),
        H=tuple(float(h) for h in H),
        hs_norms=(float(sobolev_norm(state.u.coeffs, g, 1.0)), float(sobolev_norm(state.w.coeffs, g, 1.0))),
    )


@dataclass
class DerivativeIdentityReport:
    """Residuals of dP_k/dt = (H0, -H1, -H2, -H3)_k along a trajectory."""

    times: np.ndarray
    lhs: np.ndarray        # finite-difference derivatives, shape (M, 4)
    rhs: np.ndarray        # functionals, shape (M, 4)
    abs_residual: np.ndarray
    rel_residual: np.ndarray
    combination_residual: float

    def max_relative(self) -> float:
        return float(np.max(self.rel_residual))


def verify_derivative_identities(trajectory, params: PhysicsParams) -> DerivativeIdentityReport:
    """Compare second-order finite differences of P0..P3 with the H functionals.

    Interior points use central differences, the two ends one-sided
    second-order stencils.  Relative residuals are scaled by the largest
    |H_k| along the trajectory (by 1 if that is below 1e-14).  The
    combination residual is the time derivative of ``compute_energy``
    assembled from the H values, relative to the largest term.
    """
    if not params.unit_sigmas:
        raise ValueError("the identities are stated for sigma_alpha = sigma_beta = sigma_mu = 1")
    times = np.asarray(trajectory.times, dtype=float)
    if times.size < 3:
        raise ValueError("need at least three snapshots")
    P = np.array([functionals(s) for s in trajectory.states])
    H = np.array([compute_all_H(s, params) for s in trajectory.states])
    rhs = H * np.array([1.0, -1.0, -1.0, -1.0])
    lhs = np.gradient(P, times, axis=0, edge_order=2)
    err = np.abs(lhs - rhs)
    abs_res = np.max(err, axis=0)
    scale = np.max(np.abs(rhs), axis=0)
    scale = np.where(scale < 1e-14, 1.0, scale)
    rel = abs_res / scale
    try:
        coef = energy_coefficients(params)
        terms = rhs * coef
        comb = float(np.max(np.abs(terms.sum(axis=1))) / max(np.max(np.abs(terms)), 1e-300))
    except ValueError:
        comb = float("nan")
    return DerivativeIdentityReport(times, lhs, rhs, abs_res, rel, comb)
