"""Dispersion symbol, modulation weights, gauge constant and resonance algebra.

With the linear operator d_t - i(q/2) d_x^2 + (gamma/2) d_x^3 + c0 d_x, a mode
e^{inx} evolves as e^{i t phase(n)} with

    phase(n) = (gamma/2) n^3 - (q/2) n^2 - c0 n,

which is n^3 - (q/2) n^2 - c0 n in the normalised case gamma = 2.  The
functions here are written so that ``fractions.Fraction`` inputs stay exact.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Any

import numpy as np

from .grid import SpectralField

PRESETS = ("restricted_nonresonant", "unit_sigmas_mu0", "rl_conditions")


@dataclass(frozen=True)
class PhysicsParams:
    """Real coefficients of the coupled system.

    ``c0`` is the gauge constant (beta+mu) * (mass of u0 + mass of w0).  It is
    ``None`` until fixed from initial data; the dispersion functions then use 0.
    """

    q: Any = 1.0
    gamma: Any = 2.0
    beta: Any = 0.0
    mu: Any = 0.0
    alpha: Any = 0.0
    sigma_alpha: Any = 1.0
    sigma_beta: Any = 1.0
    sigma_mu: Any = 1.0
    c0: Any = None

    @property
    def c0_value(self):
        return 0 if self.c0 is None else self.c0

    def replace(self, **changes) -> "PhysicsParams":
        return dataclasses.replace(self, **changes)

    def gauged(self, u0: SpectralField, w0: SpectralField) -> "PhysicsParams":
        """Copy with c0 frozen from the given initial data."""
        return self.replace(c0=c0_from_data(u0, w0, self.beta, self.mu))

    @property
    def is_linear(self) -> bool:
        return self.beta == 0 and self.mu == 0 and self.alpha == 0

    @property
    def restricted(self) -> bool:
        """(beta + mu) == beta * sigma_beta, the case covered by local well-posedness."""
        return np.isclose(float(self.beta + self.mu), float(self.beta * self.sigma_beta), rtol=0, atol=1e-14)

    @property
    def nonresonant(self) -> bool:
        """q/3 is not an integer."""
        r = float(self.q) / 3.0
        return not np.isclose(r, round(r), rtol=0, atol=1e-12)

    @property
    def unit_sigmas(self) -> bool:
        return self.sigma_alpha == 1 and self.sigma_beta == 1 and self.sigma_mu == 1

    def check_preset(self, name: str) -> None:
        """Raise ValueError unless the parameters satisfy the named constraint set.

        restricted_nonresonant -- (beta+mu) = beta*sigma_beta and q/3 not an integer
        unit_sigmas_mu0        -- sigma_alpha = sigma_beta = sigma_mu = 1 and mu = 0
        rl_conditions          -- sigma_alpha = sigma_beta, q*beta = 3*gamma*alpha and
                                  q/(3*gamma) an integer (periodic modulation)
        """
        if name == "restricted_nonresonant":
            if not self.restricted:
                raise ValueError("restricted_nonresonant preset needs (beta + mu) == beta * sigma_beta")
            if not self.nonresonant:
                raise ValueError("restricted_nonresonant preset needs q/3 not an integer")
        elif name == "unit_sigmas_mu0":
            if not self.unit_sigmas or self.mu != 0:
                raise ValueError("unit_sigmas_mu0 preset needs all sigmas equal to 1 and mu == 0")
        elif name == "rl_conditions":
            if self.sigma_alpha != self.sigma_beta:
                raise ValueError("rl_conditions preset needs sigma_alpha == sigma_beta")
            if not np.isclose(float(self.q * self.beta), float(3 * self.gamma * self.alpha)):
                raise ValueError("rl_conditions preset needs q*beta == 3*gamma*alpha")
            k = float(self.q) / (3.0 * float(self.gamma))
            if not np.isclose(k, round(k)):
                raise ValueError(
                    f"rl_conditions preset needs q/(3 gamma) integer, got {k:g}"
                )
        else:
            raise ValueError(f"unknown preset {name!r}; expected one of {PRESETS}")


@dataclass(frozen=True)
class ResonanceTriple:
    n: int
    n1: int
    n2: int

    @property
    def n3(self) -> int:
        return self.n - self.n1 - self.n2


def _half(x):
    """x / 2, staying exact for integer and rational scalars."""
    if isinstance(x, (int, Fraction)):
        return Fraction(x) / 2
    return x / 2


def phase(n, params: PhysicsParams):
    """Linear frequency of mode n; scalar or array input."""
    c0 = params.c0_value
    return _half(params.gamma * n**3) - _half(params.q * n**2) - c0 * n


def q_plus(n, tau, params: PhysicsParams):
    """tau - n^3 + (q/2) n^2 + c0 n  (gamma = 2), i.e. tau - phase(n)."""
    return tau - phase(n, params)


def q_minus(n, tau, params: PhysicsParams):
    """tau - n^3 - (q/2) n^2 + c0 n  (gamma = 2); the weight carried by conjugated factors."""
    c0 = params.c0_value
    return tau - _half(params.gamma * n**3) - _half(params.q * n**2) + c0 * n


def resonance_factor(triple: ResonanceTriple, q, gamma=2) -> Fraction:
    """Exact value of q+(n) - q+(n1) - q-(n2) - q+(n3) at matching tau.

    For gamma = 2 this is -3 (n1+n2)(n-n1)(n-n2-q/3).
    """
    q = Fraction(q)
    g = Fraction(gamma)
    n, n1, n2 = triple.n, triple.n1, triple.n2
    if g == 2:
        return -3 * (n1 + n2) * (n - n1) * (n - n2 - q / 3)
    return (n1 + n2) * (n - n1) * (q - 3 * g * (n - n2) / 2)


def resonance_array(n, n1, n2, q: float, gamma: float = 2.0):
    """Floating point resonance factor on integer arrays (broadcasting)."""
    return (n1 + n2) * (n - n1) * (q - 1.5 * gamma * (n - n2))


def classify_M1_L_M2(triple: ResonanceTriple) -> tuple[int, int, int]:
    """(max, middle, min) of |n-n1|, |n1+n2|, |n-n2|, the middle chosen branch-wise."""
    n, n1, n2 = triple.n, triple.n1, triple.n2
    a, b, c = abs(n - n1), abs(n1 + n2), abs(n - n2)
    if (a - b) * (a - c) <= 0:
        mid = a
    elif (b - a) * (b - c) <= 0:
        mid = b
    else:
        mid = c
    return max(a, b, c), mid, min(a, b, c)


def c0_from_data(u0: SpectralField, w0: SpectralField, beta: Real, mu: Real) -> float:
    """(beta + mu) * (sum |u0_hat|^2 + sum |w0_hat|^2).

    The mass is the normalised one, (1/2pi) int |u|^2 dx, which is exactly the
    zero mode of |u|^2 and therefore the quantity the gauge has to remove.
    """
    if u0.grid != w0.grid:
        raise ValueError("u0 and w0 live on different grids")
    return float((beta + mu) * (u0.mass() + w0.mass()))
