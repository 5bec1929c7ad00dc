"""Discrete periodic Fourier representation on the 2pi torus.

Coefficients follow the normalisation

    g_hat(n) = (1/2pi) int_0^{2pi} e^{-inx} g(x) dx  ~  (1/N) sum_j g(x_j) e^{-i n x_j},
    g(x)     = sum_n g_hat(n) e^{inx},

and are stored in numpy FFT order, i.e. wavenumbers
``[0, 1, ..., N/2-1, -N/2, ..., -1]``.  All array helpers act on the last
axis so that batches of fields (time nodes, ensembles) go through the same
code path as single fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PeriodicGrid:
    """N-mode discrete torus of length 2pi."""

    n_modes: int

    def __post_init__(self) -> None:
        n = self.n_modes
        if int(n) != n or n < 8 or n % 2:
            raise ValueError(f"n_modes must be an even integer >= 8, got {n!r}")

    @property
    def length(self) -> float:
        return TWO_PI

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        k = np.fft.fftfreq(self.n_modes, d=1.0 / self.n_modes).round().astype(np.int64)
        k.setflags(write=False)
        return k

    @cached_property
    def x(self) -> np.ndarray:
        x = TWO_PI * np.arange(self.n_modes) / self.n_modes
        x.setflags(write=False)
        return x

    @cached_property
    def ascending_order(self) -> np.ndarray:
        """Permutation taking FFT order to ascending wavenumber order."""
        idx = np.argsort(self.wavenumbers, kind="stable")
        idx.setflags(write=False)
        return idx

    def index_of(self, n: int) -> int:
        """Array position of wavenumber ``n``."""
        half = self.n_modes // 2
        if not -half <= n < half:
            raise ValueError(f"wavenumber {n} not on a {self.n_modes}-mode grid")
        return n % self.n_modes


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SpectralField:
    """One complex periodic function held by its Fourier coefficients."""

    grid: PeriodicGrid
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.coeffs)
        if c.shape != (self.grid.n_modes,):
            raise ValueError(
                f"expected {self.grid.n_modes} coefficients, got shape {c.shape}"
            )
        object.__setattr__(self, "coeffs", _frozen(c))

    @classmethod
    def zeros(cls, grid: PeriodicGrid) -> "SpectralField":
        return cls(grid, np.zeros(grid.n_modes, dtype=np.complex128))

    @classmethod
    def from_modes(cls, grid: PeriodicGrid, modes: dict[int, complex]) -> "SpectralField":
        """Field with the given {wavenumber: coefficient} entries, zero elsewhere."""
        c = np.zeros(grid.n_modes, dtype=np.complex128)
        for n, a in modes.items():
            c[grid.index_of(n)] += a
        return cls(grid, c)

    def _check(self, other: "SpectralField") -> None:
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._check(other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._check(other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar: complex) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.grid, -self.coeffs)

    def conj(self) -> "SpectralField":
        """Coefficients of the complex conjugate function (Nyquist mode dropped)."""
        return SpectralField(self.grid, conj_coeffs(self.coeffs))

    def equals(self, other: "SpectralField") -> bool:
        return self.grid == other.grid and np.array_equal(self.coeffs, other.coeffs)

    def mass(self) -> float:
        """Normalised L2 mass sum_n |u_hat(n)|^2 = (1/2pi) int |u|^2 dx."""
        return float(np.sum(np.abs(self.coeffs) ** 2))


@dataclass(frozen=True, eq=False)
class PairState:
    """The two envelopes (u, w) at one instant."""

    u: SpectralField
    w: SpectralField
    time: float = 0.0

    def __post_init__(self) -> None:
        if self.u.grid != self.w.grid:
            raise ValueError("u and w must share one grid")

    @property
    def grid(self) -> PeriodicGrid:
        return self.u.grid

    @classmethod
    def from_arrays(
        cls, grid: PeriodicGrid, u: np.ndarray, w: np.ndarray, time: float = 0.0
    ) -> "PairState":
        return cls(SpectralField(grid, u), SpectralField(grid, w), float(time))

    def swapped(self) -> "PairState":
        return PairState(self.w, self.u, self.time)

    def equals(self, other: "PairState") -> bool:
        return self.u.equals(other.u) and self.w.equals(other.w) and self.time == other.time


def to_spectral(samples: Sequence[complex], grid: PeriodicGrid) -> SpectralField:
    """Fourier coefficients of the samples g(x_j), x_j = 2pi j / N."""
    v = np.asarray(samples, dtype=np.complex128)
    if v.shape != (grid.n_modes,):
        raise ValueError(
            f"expected {grid.n_modes} samples, got array of shape {v.shape}"
        )
    return SpectralField(grid, np.fft.fft(v) / grid.n_modes)


def to_physical(f: SpectralField) -> np.ndarray:
    """Samples g(x_j) = sum_n g_hat(n) e^{i n x_j}."""
    return np.fft.ifft(f.coeffs) * f.grid.n_modes


def spectral_derivative(f: SpectralField, order: int) -> SpectralField:
    if order not in (1, 2, 3):
        raise ValueError(f"unsupported derivative order {order!r}; expected 1, 2 or 3")
    ik = 1j * f.grid.wavenumbers
    return SpectralField(f.grid, f.coeffs * ik**order)


# ---------------------------------------------------------------------------
# array-level kernels (last axis = modes, FFT order)


def conj_coeffs(c: np.ndarray) -> np.ndarray:
    """Coefficients of conj(g): conj(c(-n)).  The -N/2 image lies off-grid and is zeroed."""
    n = c.shape[-1]
    out = np.conj(np.roll(c[..., ::-1], 1, axis=-1))
    out[..., n // 2] = 0.0
    return out


def pad(c: np.ndarray, m: int) -> np.ndarray:
    """Zero-pad N FFT-ordered coefficients to an M-mode array (M >= N)."""
    n = c.shape[-1]
    h = n // 2
    out = np.zeros(c.shape[:-1] + (m,), dtype=np.complex128)
    out[..., :h] = c[..., :h]
    out[..., m - h :] = c[..., h:]
    return out


def truncate(cp: np.ndarray, n: int) -> np.ndarray:
    """Keep modes |k| <= N/2-1 of an M-mode coefficient array; the -N/2 slot is zero."""
    m = cp.shape[-1]
    h = n // 2
    out = np.zeros(cp.shape[:-1] + (n,), dtype=np.complex128)
    out[..., :h] = cp[..., :h]
    out[..., h + 1 :] = cp[..., m - h + 1 :]
    return out


def padded_physical(c: np.ndarray, m: int | None = None) -> np.ndarray:
    """Samples on the 2N-point (or M-point) grid of the trigonometric polynomial c."""
    n = c.shape[-1]
    m = 2 * n if m is None else m
    return np.fft.ifft(pad(c, m), axis=-1) * m


def from_padded_physical(v: np.ndarray, n: int) -> np.ndarray:
    m = v.shape[-1]
    return truncate(np.fft.fft(v, axis=-1) / m, n)


def dealiased_triple_product(
    a: SpectralField,
    b: SpectralField,
    c: SpectralField,
    conjugate: tuple[bool, bool, bool] = (False, False, False),
) -> SpectralField:
    """Exact coefficients of the pointwise product a*b*c on modes |n| <= N/2-1.

    ``conjugate[k]`` replaces the k-th factor by its complex conjugate.  The
    factors are evaluated on a 2N-point grid, where a cubic product of N-mode
    polynomials has no wrap-around onto the retained modes.
    """
    grid = a.grid
    if b.grid != grid or c.grid != grid:
        raise ValueError("dealiased_triple_product: fields live on different grids")
    n = grid.n_modes
    prod = np.ones(2 * n, dtype=np.complex128)
    for f, flag in zip((a, b, c), conjugate):
        v = padded_physical(f.coeffs)
        prod = prod * (np.conj(v) if flag else v)
    return SpectralField(grid, from_padded_physical(prod, n))


def hs_weights(grid: PeriodicGrid, s: float) -> np.ndarray:
    """<n>^{2s} = (1 + n^2)^s."""
    return (1.0 + grid.wavenumbers.astype(float) ** 2) ** s


def sobolev_norm(coeffs: np.ndarray, grid: PeriodicGrid, s: float) -> np.ndarray:
    """(2pi sum <n>^{2s} |c(n)|^2)^{1/2} along the last axis."""
    return np.sqrt(TWO_PI * np.sum(hs_weights(grid, s) * np.abs(coeffs) ** 2, axis=-1))


def random_field(
    grid: PeriodicGrid,
    rng: np.random.Generator,
    decay: float = 0.0,
    kmax: int | None = None,
    amplitude: float = 1.0,
) -> SpectralField:
    """Random coefficients with |u_hat(n)| ~ <n>^{-decay} on |n| <= kmax (Nyquist left empty)."""
    k = grid.wavenumbers
    kmax = grid.n_modes // 2 - 1 if kmax is None else kmax
    c = rng.standard_normal(grid.n_modes) + 1j * rng.standard_normal(grid.n_modes)
    c *= (1.0 + k.astype(float) ** 2) ** (-decay / 2.0)
    c[np.abs(k) > kmax] = 0.0
    c[grid.n_modes // 2] = 0.0
    return SpectralField(grid, amplitude * c)


__all__ = [
    "TWO_PI",
    "PeriodicGrid",
    "SpectralField",
    "PairState",
    "to_spectral",
    "to_physical",
    "spectral_derivative",
    "dealiased_triple_product",
    "conj_coeffs",
    "pad",
    "truncate",
    "padded_physical",
    "from_padded_physical",
    "hs_weights",
    "sobolev_norm",
    "random_field",
]
