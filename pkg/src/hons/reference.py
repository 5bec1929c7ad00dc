"""Closed-form and transformed reference solutions used as oracles.

* plane waves u = A e^{i(kx - omega t)} (optionally with a co-propagating w),
* the change of variables between the reduced transport system (q = alpha = 0)
  and the full system when sigma_alpha = sigma_beta and q beta = 3 gamma alpha,
* independent steppers for the scalar w = 0 reduction and for the real
  modified KdV limit.

The steppers here deliberately share no code with ``dynamics``: they use
ascending-order spectra, scipy's FFT and the classical integrating-factor
RK4 scheme.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import fft as sfft

from .dispersion import PhysicsParams
from .dynamics import BlowUpError, n_steps_for
from .grid import PairState, PeriodicGrid, SpectralField

DIRECTIONS = ("forward", "inverse")


# ---------------------------------------------------------------------------
# plane waves


def plane_wave_omegas(A: complex, B: complex, k: int, params: PhysicsParams) -> tuple[float, float]:
    """Frequencies of u = A e^{i(kx - w_u t)}, w = B e^{i(kx - w_w t)}.

    Substituting into the system, |u|^2 and |w|^2 are constant so only the
    beta and alpha terms survive:
        w_u = (q/2) k^2 - (gamma/2) k^3 + beta k (|A|^2 + s_b |B|^2) - alpha (|A|^2 + s_a |B|^2)
    and symmetrically for w.  mu does not enter.
    """
    p = params
    a2, b2 = abs(A) ** 2, abs(B) ** 2
    lin = 0.5 * p.q * k**2 - 0.5 * p.gamma * k**3
    wu = lin + p.beta * k * (a2 + p.sigma_beta * b2) - p.alpha * (a2 + p.sigma_alpha * b2)
    ww = lin + p.beta * k * (b2 + p.sigma_beta * a2) - p.alpha * (b2 + p.sigma_alpha * a2)
    return float(wu), float(ww)


def plane_wave_omega(A: complex, k: int, params: PhysicsParams, coupled: bool = False, B: complex = 0.0) -> float:
    """Frequency of the u-component; ``coupled`` includes a w-wave of amplitude B at the same k."""
    return plane_wave_omegas(A, B if coupled else 0.0, k, params)[0]


@dataclass(frozen=True)
class PlaneWaveSpec:
    A: complex
    k: int
    params: PhysicsParams
    B: complex = 0.0

    @property
    def omegas(self) -> tuple[float, float]:
        return plane_wave_omegas(self.A, self.B, self.k, self.params)

    @property
    def omega(self) -> float:
        return self.omegas[0]

    def state(self, grid: PeriodicGrid, t: float = 0.0) -> PairState:
        wu, ww = self.omegas
        u = SpectralField.from_modes(grid, {self.k: self.A * np.exp(-1j * wu * t)})
        w = SpectralField.from_modes(grid, {self.k: self.B * np.exp(-1j * ww * t)})
        return PairState(u, w, t)

    def samples(self, x: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray]:
        wu, ww = self.omegas
        ph = np.exp(1j * self.k * x)
        return self.A * ph * np.exp(-1j * wu * t), self.B * ph * np.exp(-1j * ww * t)


def plane_wave_residual(spec: PlaneWaveSpec, n_points: int = 64, t: float = 0.3) -> float:
    """max |2i u_t + q u_xx + i gamma u_xxx - F1| over both components, by direct substitution."""
    p = spec.params
    x = 2 * np.pi * np.arange(n_points) / n_points
    k = spec.k
    u, w = spec.samples(x, t)
    wu, ww = spec.omegas

    def residual(a, b, om):
        a_t, a_x, a_xx, a_xxx = -1j * om * a, 1j * k * a, -(k**2) * a, -1j * k**3 * a
        ma, mb = np.abs(a) ** 2, np.abs(b) ** 2
        # the mu term carries d/dx of the constant moduli and vanishes
        F = -2j * p.beta * (ma + p.sigma_beta * mb) * a_x - 2 * p.alpha * a * (ma + p.sigma_alpha * mb)
        return np.max(np.abs(2j * a_t + p.q * a_xx + 1j * p.gamma * a_xxx - F))

    return float(max(residual(u, w, wu), residual(w, u, ww)))


# ---------------------------------------------------------------------------
# reduced transport system <-> full system


@dataclass(frozen=True)
class RLShift:
    """Integer modulation wavenumber k = q/(3 gamma), drift speed and phase rate."""

    k: int
    speed: float   # q^2 / (6 gamma)
    rate: float    # q^3 / (27 gamma^2)


def rl_shift(params: PhysicsParams) -> RLShift:
    q, g = params.q, params.gamma
    if g == 0:
        raise ValueError("gamma must be non-zero")
    k = Fraction(q).limit_denominator(10**6) / (3 * Fraction(g).limit_denominator(10**6))
    if k.denominator != 1 or not np.isclose(float(k), float(q) / (3 * float(g))):
        raise ValueError(
            f"modulation wavenumber q/(3 gamma) = {float(q) / (3 * float(g)):g} is not an integer; "
            "the modulated function would not be 2pi-periodic"
        )
    return RLShift(int(k), float(q) ** 2 / (6 * float(g)), float(q) ** 3 / (27 * float(g) ** 2))


def check_rl_conditions(params: PhysicsParams) -> None:
    if params.sigma_alpha != params.sigma_beta:
        raise ValueError("transform requires sigma_alpha == sigma_beta")
    if not np.isclose(float(params.q * params.beta), float(3 * params.gamma * params.alpha)):
        raise ValueError("transform requires q*beta == 3*gamma*alpha")


def reduced_params(params: PhysicsParams) -> PhysicsParams:
    """Parameters of the transport system solved by (u1, w1): q = 0, alpha = 0."""
    return params.replace(q=0.0, alpha=0.0, c0=None)


def rl_transform(state: PairState, params: PhysicsParams, direction: str = "forward") -> PairState:
    """Map a state of the reduced system at time t to the full system (``forward``) or back.

    forward: u(x, t) = u1(x - c t, t) exp(i(k x - Omega t)), i.e.
    u_hat(n) = u1_hat(n - k) exp(-i (n - k) c t) exp(-i Omega t).
    The index shift is a cyclic roll so that the inverse is exact.
    """
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    check_rl_conditions(params)
    sh = rl_shift(params)
    t = state.time
    n = state.grid.wavenumbers.astype(float)
    out = []
    for f in (state.u, state.w):
        c = f.coeffs
        if direction == "forward":
            c = c * np.exp(-1j * n * sh.speed * t)
            c = np.roll(c, sh.k) * np.exp(-1j * sh.rate * t)
        else:
            c = np.roll(c * np.exp(1j * sh.rate * t), -sh.k)
            c = c * np.exp(1j * n * sh.speed * t)
        out.append(c)
    return PairState.from_arrays(state.grid, out[0], out[1], t)


# ---------------------------------------------------------------------------
# independent scalar steppers (integrating-factor RK4, ascending spectra)


class _ScalarIFRK4:
    """u_t = L u + N(u) with diagonal L, stepped as v = e^{-tL} u with classical RK4."""

    def __init__(self, n_modes: int, dt: float, symbol: np.ndarray, nonlinear):
        self.dt = dt
        self.e_half = np.exp(0.5 * dt * symbol)
        self.e_full = np.exp(dt * symbol)
        self.N = nonlinear

    def step(self, u: np.ndarray) -> np.ndarray:
        h, N = self.dt, self.N
        eh, ef = self.e_half, self.e_full
        k1 = N(u)
        k2 = N(eh * (u + 0.5 * h * k1))
        k3 = N(eh * u + 0.5 * h * k2)
        k4 = N(ef * u + h * eh * k3)
        return ef * u + h / 6.0 * (ef * k1 + 2.0 * eh * (k2 + k3) + k4)


def _ascending(n_modes: int) -> np.ndarray:
    return np.arange(-n_modes // 2, n_modes // 2)


def _to_ascending(f: SpectralField) -> np.ndarray:
    return sfft.fftshift(f.coeffs)


def _from_ascending(grid: PeriodicGrid, c: np.ndarray) -> SpectralField:
    return SpectralField(grid, sfft.ifftshift(c))


class _Padded:
    """Physical values on a 2N grid from ascending spectra, and the way back."""

    def __init__(self, n_modes: int):
        self.n = n_modes
        self.m = 2 * n_modes
        self.lo = self.m // 2 - n_modes // 2

    def up(self, c: np.ndarray) -> np.ndarray:
        big = np.zeros(self.m, dtype=np.complex128)
        big[self.lo : self.lo + self.n] = c
        return sfft.ifft(sfft.ifftshift(big)) * self.m

    def down(self, v: np.ndarray) -> np.ndarray:
        big = sfft.fftshift(sfft.fft(v)) / self.m
        c = big[self.lo : self.lo + self.n].copy()
        c[0] = 0.0  # -N/2 is not retained
        return c


def single_equation_rhs(n_modes: int, params: PhysicsParams):
    """Symbol and nonlinearity of
    u_t = i(q/2) u_xx - (gamma/2) u_xxx + i alpha |u|^2 u - (beta+mu) |u|^2 u_x - mu u^2 conj(u)_x.
    """
    p = params
    n = _ascending(n_modes).astype(float)
    symbol = 1j * (-0.5 * p.q * n**2 + 0.5 * p.gamma * n**3)
    pad = _Padded(n_modes)

    def nonlinear(c):
        U = pad.up(c)
        Ux = pad.up(1j * n * c)
        m = np.abs(U) ** 2
        return pad.down(1j * p.alpha * m * U - (p.beta + p.mu) * m * Ux - p.mu * U * U * np.conj(Ux))

    return symbol, nonlinear


def single_equation_step(u: SpectralField, dt: float, params: PhysicsParams) -> SpectralField:
    """One integrating-factor RK4 step of the scalar (w = 0) equation."""
    symbol, nl = single_equation_rhs(u.grid.n_modes, params)
    c = _ScalarIFRK4(u.grid.n_modes, dt, symbol, nl).step(_to_ascending(u))
    if not np.all(np.isfinite(c)) or np.max(np.abs(c)) > 1e12:
        raise BlowUpError(dt)
    return _from_ascending(u.grid, c)


def single_equation_evolve(u0: SpectralField, T: float, dt: float, params: PhysicsParams) -> SpectralField:
    n_steps = n_steps_for(T, dt)
    symbol, nl = single_equation_rhs(u0.grid.n_modes, params)
    st = _ScalarIFRK4(u0.grid.n_modes, dt, symbol, nl)
    c = _to_ascending(u0)
    for j in range(n_steps):
        c = st.step(c)
        if not np.all(np.isfinite(c)) or np.max(np.abs(c)) > 1e12:
            raise BlowUpError((j + 1) * dt)
    return _from_ascending(u0.grid, c)


def mkdv_evolve(u0: np.ndarray, T: float, dt: float, gamma: float, coeff: float) -> np.ndarray:
    """Real modified KdV  v_t + (gamma/2) v_xxx + coeff v^2 v_x = 0  on 2pi-periodic samples.

    Uses real FFTs with 2x padding and integrating-factor RK4; returns samples at T.
    """
    v = np.asarray(u0, dtype=float)
    n = v.size
    m = 2 * n
    k = np.arange(n // 2 + 1, dtype=float)
    symbol = 0.5j * gamma * k**3

    def nonlinear(c):
        cp = np.zeros(m // 2 + 1, dtype=np.complex128)
        cp[: n // 2] = c[: n // 2]
        V = sfft.irfft(cp, m) * m
        Vx = sfft.irfft(1j * np.arange(m // 2 + 1) * cp, m) * m
        out = sfft.rfft(-coeff * V * V * Vx) / m
        res = np.zeros(n // 2 + 1, dtype=np.complex128)
        res[: n // 2] = out[: n // 2]
        return res

    st = _ScalarIFRK4(n, dt, symbol, nonlinear)
    c = sfft.rfft(v) / n
    c[n // 2] = 0.0
    for _ in range(n_steps_for(T, dt)):
        c = st.step(c)
    return sfft.irfft(c * n, n)
