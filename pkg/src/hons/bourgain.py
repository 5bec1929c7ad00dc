"""Sobolev and Bourgain-type norms on discrete space-time spectra, and estimate experiments.

A ``SpaceTimeSpectrum`` stores f~(n, tau) on a uniform tau grid.  Two layouts
are supported:

plain
    tau_n,j = tau_values[j] for every n (DFT frequencies of the window).
demodulated
    tau_n,j = phase(n) + tau_values[j]; the time signal is multiplied by
    e^{-i t phase(n)} before the DFT.  The modulation q_+ = tau - phase(n) is
    then tau_values[j] exactly, and the dispersive oscillation, which for
    large n exceeds the Nyquist frequency of any practical time step, is
    not aliased.

The continuous tau integrals become Riemann sums with the grid spacing.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import windows

from .dispersion import PhysicsParams, phase, resonance_array
from .dynamics import Trajectory, apply_linear, linear_symbol
from .grid import PairState, PeriodicGrid, SpectralField, sobolev_norm


def hs_norm(f: SpectralField, s: float) -> float:
    """(2pi sum (1+n^2)^s |f_hat(n)|^2)^{1/2}."""
    return float(sobolev_norm(f.coeffs, f.grid, s))


def japanese(x):
    """<x> = (1 + x^2)^{1/2}."""
    return np.sqrt(1.0 + np.asarray(x, dtype=float) ** 2)


# ---------------------------------------------------------------------------
# space-time transform


@dataclass(frozen=True)
class WindowSpec:
    """Time window: ``tukey`` (cosine taper, flat on the central 1 - taper fraction) or ``rectangular``."""

    kind: str = "tukey"
    taper: float = 0.5
    demodulate: bool = False

    def __post_init__(self):
        if self.kind not in ("tukey", "rectangular"):
            raise ValueError(f"unknown window kind {self.kind!r}")
        if not 0.0 <= self.taper <= 1.0:
            raise ValueError("taper fraction must lie in [0, 1]")

    def values(self, m: int) -> np.ndarray:
        if self.kind == "rectangular":
            return np.ones(m)
        return windows.tukey(m, alpha=self.taper, sym=True)

    def describe(self) -> str:
        tag = f"tukey(taper={self.taper:g})" if self.kind == "tukey" else "rectangular"
        return tag + (", demodulated" if self.demodulate else "")


@dataclass
class SpaceTimeSpectrum:
    grid: PeriodicGrid
    params: PhysicsParams
    tau_values: np.ndarray          # (M,) uniform
    coeffs: np.ndarray              # (N, M), modes in FFT order
    tau_shift: np.ndarray | None = None   # (N,) per-mode offset, None for the plain layout
    window: str = "tukey(taper=0.5)"

    @property
    def d_tau(self) -> float:
        return float(self.tau_values[1] - self.tau_values[0]) if self.tau_values.size > 1 else 1.0

    def modulation(self) -> np.ndarray:
        """q_+(n, tau) on the (N, M) grid."""
        if self.tau_shift is not None:
            return np.broadcast_to(self.tau_values, self.coeffs.shape)
        n = self.grid.wavenumbers.astype(float)[:, None]
        return self.tau_values[None, :] - phase(n, self.params)

    def scaled(self, lam: complex) -> "SpaceTimeSpectrum":
        return SpaceTimeSpectrum(self.grid, self.params, self.tau_values, lam * self.coeffs,
                                 self.tau_shift, self.window)


def spacetime_transform(
    trajectory: Trajectory,
    window: WindowSpec = WindowSpec(),
    n_window: int | None = None,
) -> tuple[SpaceTimeSpectrum, SpaceTimeSpectrum]:
    """Windowed DFT in time of both components: f~(n, tau) ~ dt sum_j e^{-i tau t_j} psi_j f_hat(n, t_j).

    ``n_window`` (default: all samples) takes the first samples of the
    trajectory.  The tau grid is 2pi k / (M dt) in DFT order.
    """
    times = np.asarray(trajectory.times, dtype=float)
    m = times.size if n_window is None else int(n_window)
    if m < 4 or m > times.size:
        raise ValueError(f"window of {m} samples does not fit a trajectory of {times.size} samples")
    dt = np.diff(times[:m])
    if m > 1 and not np.allclose(dt, dt[0], rtol=1e-9, atol=0):
        raise ValueError("time grid must be uniform")
    h = float(dt[0])
    t = times[:m]
    grid = trajectory.grid
    params = trajectory.params
    tau = 2.0 * np.pi * np.fft.fftfreq(m, d=h)
    psi = window.values(m)
    shift = None
    if window.demodulate:
        shift = linear_symbol(grid, params, "gauged")
    out = []
    for comp in ("u", "w"):
        data = np.array([getattr(s, comp).coeffs for s in trajectory.states[:m]]).T  # (N, M)
        if shift is not None:
            data = data * np.exp(-1j * np.outer(shift, t))
        spec = h * np.exp(-1j * tau * t[0])[None, :] * np.fft.fft(data * psi[None, :], axis=1)
        out.append(SpaceTimeSpectrum(grid, params, tau, spec, shift, window.describe()))
    return out[0], out[1]


# ---------------------------------------------------------------------------
# norms


def xsb_norm(spec: SpaceTimeSpectrum, s: float, b: float) -> float:
    """|| <n>^s <q_+>^b f~ ||_{l^2_n L^2_tau}."""
    wn = japanese(spec.grid.wavenumbers)[:, None] ** (2 * s)
    wq = japanese(spec.modulation()) ** (2 * b)
    return float(np.sqrt(np.sum(wn * wq * np.abs(spec.coeffs) ** 2) * spec.d_tau))


def zs_norm(spec: SpaceTimeSpectrum, s: float, b: float = 0.0) -> float:
    """|| <n>^s <q_+>^b f~ ||_{l^2_n L^1_tau}."""
    wn = japanese(spec.grid.wavenumbers) ** (2 * s)
    inner = np.sum(japanese(spec.modulation()) ** b * np.abs(spec.coeffs), axis=1) * spec.d_tau
    return float(np.sqrt(np.sum(wn * inner**2)))


def ys_norm(spec: SpaceTimeSpectrum, s: float) -> float:
    return xsb_norm(spec, s, 0.5) + zs_norm(spec, s, 0.0)


# ---------------------------------------------------------------------------
# experiment configuration


@dataclass(frozen=True)
class EstimateConfig:
    s: float = 0.5
    b: float = 0.5
    theta: float = 1.0 / 24.0
    ensemble_size: int = 200
    seed: int = 0
    band: int = 2          # modulation lattice |sigma| <= band in the trilinear ensembles

    def __post_init__(self):
        if self.s < 0.5:
            raise ValueError("s must be >= 1/2")
        if not 0.0 < self.theta < 1.0 / 12.0:
            raise ValueError("theta must lie in (0, 1/12)")
        if self.ensemble_size < 1:
            raise ValueError("ensemble_size must be positive")
        if self.band < 0:
            raise ValueError("band must be non-negative")


# ---------------------------------------------------------------------------
# linear bound


@dataclass
class LinearBoundReport:
    n_values: tuple[int, ...]
    lhs: dict[int, np.ndarray]
    rhs: dict[int, np.ndarray]

    @property
    def ratios(self) -> dict[int, np.ndarray]:
        return {n: self.lhs[n] / self.rhs[n] for n in self.n_values}

    def max_ratio(self, n: int) -> float:
        return float(np.max(self.ratios[n]))

    def median_ratio(self, n: int) -> float:
        return float(np.median(self.ratios[n]))

    def growth(self) -> float:
        """Largest factor by which the max ratio grows between consecutive resolutions."""
        m = [self.max_ratio(n) for n in self.n_values]
        return float(max(b / a for a, b in zip(m[:-1], m[1:]))) if len(m) > 1 else 1.0


def random_hs_pair(grid: PeriodicGrid, s: float, rng: np.random.Generator) -> PairState:
    """Random data with |u_hat(n)| ~ <n>^{-s-1/2} times a uniform(0.5, 1) factor, random phases."""
    k = grid.wavenumbers
    out = []
    for _ in range(2):
        mag = japanese(k) ** (-s - 0.5) * rng.uniform(0.5, 1.0, grid.n_modes)
        c = mag * np.exp(2j * np.pi * rng.random(grid.n_modes))
        c[grid.n_modes // 2] = 0.0
        out.append(c)
    return PairState.from_arrays(grid, out[0], out[1])


def linear_space_time_norm(
    state: PairState,
    params: PhysicsParams,
    s: float,
    window: WindowSpec = WindowSpec(demodulate=True),
    t_span: float = 4.0,
    n_times: int = 256,
) -> float:
    """||psi W(t) u0||_{Y_s} + ||psi W(t) w0||_{Y_s} with psi supported on [-t_span/2, t_span/2]."""
    h = t_span / n_times
    start = PairState(state.u, state.w, -0.5 * t_span)
    states = [apply_linear(start, j * h, params) for j in range(n_times)]
    traj = Trajectory(state.grid, params, np.array([st.time for st in states]), states)
    su, sw = spacetime_transform(traj, window)
    return ys_norm(su, s) + ys_norm(sw, s)


def linear_bound_experiment(
    config: EstimateConfig,
    params: PhysicsParams,
    n_values: tuple[int, ...] = (32, 64, 128),
) -> LinearBoundReport:
    """Ratios ||psi W u0||_{Y x Y} / ||u0||_{H^s x H^s} over a seeded ensemble for each N."""
    lhs, rhs = {}, {}
    for n in n_values:
        grid = PeriodicGrid(n)
        rng = np.random.default_rng([config.seed, n])
        a = np.empty(config.ensemble_size)
        b = np.empty(config.ensemble_size)
        for i in range(config.ensemble_size):
            st = random_hs_pair(grid, config.s, rng)
            b[i] = np.hypot(hs_norm(st.u, config.s), hs_norm(st.w, config.s))
            a[i] = linear_space_time_norm(st, params, config.s)
        lhs[n], rhs[n] = a, b
    return LinearBoundReport(tuple(n_values), lhs, rhs)


# ---------------------------------------------------------------------------
# trilinear estimate on an integer modulation lattice


def lattice_modes(n_modes: int) -> np.ndarray:
    """Ascending wavenumbers -N/2+1 .. N/2-1 (Nyquist excluded, symmetric range)."""
    h = n_modes // 2
    return np.arange(-h + 1, h)


def lattice_ensemble_member(n_modes: int, s: float, band: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Two arrays V[n, sigma] with |V| = <n>^{-s-1/2} <sigma>^{-1} and uniform random phases."""
    n = lattice_modes(n_modes)
    sig = np.arange(-band, band + 1)
    mag = japanese(n)[:, None] ** (-s - 0.5) / japanese(sig)[None, :]
    out = []
    for _ in range(2):
        out.append(mag * np.exp(2j * np.pi * rng.random(mag.shape)))
    return out[0], out[1]


def lattice_norm(V: np.ndarray, s: float, b: float, kind: int = 1) -> float:
    """(1, s, b) [kind 1, l^2 L^2] or (2, s, b) [kind 2, l^2 L^1] norm of a lattice array (d sigma = 1)."""
    m = V.shape[0]
    n = lattice_modes(m + 1)
    band = (V.shape[1] - 1) // 2
    sig = np.arange(-band, band + 1)
    wn = japanese(n) ** (2 * s)
    if kind == 1:
        return float(np.sqrt(np.sum(wn[:, None] * japanese(sig)[None, :] ** (2 * b) * np.abs(V) ** 2)))
    inner = np.sum(japanese(sig)[None, :] ** b * np.abs(V), axis=1)
    return float(np.sqrt(np.sum(wn * inner**2)))


def trilinear_rhs(Vu: np.ndarray, Vw: np.ndarray, s: float, theta: float) -> float:
    """The six-product bound f(u, w)."""
    a = lambda V: lattice_norm(V, s, 0.5 - theta)
    x = lambda V: lattice_norm(V, s, 0.5)
    z = lambda V: lattice_norm(V, 0.5, 0.0, kind=2)
    x0 = lambda V: lattice_norm(V, s, 0.0)
    return (
        (a(Vu) ** 2 + a(Vw) ** 2) * x(Vu)
        + a(Vu) * a(Vw) * x(Vu)
        + (z(Vu) ** 2 + z(Vw) ** 2) * x0(Vu)
        + z(Vu) * z(Vw) * x0(Vu)
    )


class TrilinearKernel:
    """Exact space-time coefficients of G1(u, w) for lattice-supported inputs.

    With q and 3 gamma / 2 integers the output modulation
    sigma_out = sigma1 + sigma2 + sigma3 + R(n, n1, n2) is an integer, where
    R is the resonance factor and the conjugated factor sits in slot 2.  All
    (n1, n2, n3) triples are enumerated once; for each ensemble member the
    sigma convolutions are done by FFT and scattered into the distinct
    (n, sigma_out) bins with ``np.bincount``.

    G1 is taken in its restricted form: the transport term excludes n1 = n
    (which is the mean subtraction), the remaining terms carry their
    derivative symbols.
    """

    def __init__(self, n_modes: int, band: int, params: PhysicsParams, chunk: int = 60000):
        if not params.restricted:
            raise ValueError("trilinear experiment needs (beta + mu) == beta * sigma_beta")
        if not params.nonresonant:
            raise ValueError("trilinear experiment needs q/3 not an integer")
        q, g = float(params.q), float(params.gamma)
        if not (q.is_integer() and (1.5 * g).is_integer()):
            raise ValueError("integer modulation lattice needs integer q and 3*gamma/2")
        self.n_modes = n_modes
        self.band = band
        self.params = params
        modes = lattice_modes(n_modes)
        L = modes.size
        self.L = L
        w = 2 * band + 1
        self.width = 3 * w - 2
        self.P = int(2 ** np.ceil(np.log2(self.width)))
        i1, i2, i3 = (a.ravel() for a in np.meshgrid(np.arange(L), np.arange(L), np.arange(L), indexing="ij"))
        n1, n2, n3 = modes[i1], modes[i2], modes[i3]
        n = n1 + n2 + n3
        R = np.rint(resonance_array(n, n1, n2, q, g)).astype(np.int64)
        p = params
        transport = (p.beta + p.mu) * 1j * n1 * ((n2 + n3) != 0)
        self.coef_uuu = transport + p.mu * 1j * n2 - 1j * p.alpha
        self.coef_uww = transport + p.mu * p.sigma_mu * 1j * (n2 + n3) - 1j * p.alpha * p.sigma_alpha
        self.i1, self.i2, self.i3 = i1, i2, i3
        sig = np.arange(self.width) - 3 * band
        out_n = np.repeat(n, self.width)
        out_s = (R[:, None] + sig[None, :]).ravel()
        smin = out_s.min()
        span = out_s.max() - smin + 1
        keys = (out_n - out_n.min()) * span + (out_s - smin)
        uniq, inverse = np.unique(keys, return_inverse=True)
        self.bin_index = inverse.reshape(-1, self.width)
        self.bin_n = uniq // span + out_n.min()
        self.bin_sigma = uniq % span + smin
        self.n_bins = uniq.size
        self.chunk = chunk

    def coefficients(self, Vu: np.ndarray, Vw: np.ndarray) -> np.ndarray:
        """Values of G1~ on the bins (self.bin_n, self.bin_sigma)."""
        P, width = self.P, self.width
        fu = np.fft.fft(Vu, P, axis=1)
        fw = np.fft.fft(Vw, P, axis=1)
        # conj factor: C[n2, sigma2] = conj(V[-n2, -sigma2])
        cu = np.fft.fft(np.conj(Vu[::-1, ::-1]), P, axis=1)
        cw = np.fft.fft(np.conj(Vw[::-1, ::-1]), P, axis=1)
        re = np.zeros(self.n_bins)
        im = np.zeros(self.n_bins)
        for a in range(0, self.i1.size, self.chunk):
            sl = slice(a, a + self.chunk)
            i1, i2, i3 = self.i1[sl], self.i2[sl], self.i3[sl]
            prod = (self.coef_uuu[sl, None] * (cu[i2] * fu[i3])
                    + self.coef_uww[sl, None] * (cw[i2] * fw[i3])) * fu[i1]
            conv = np.fft.ifft(prod, axis=1)[:, :width]
            idx = self.bin_index[sl].ravel()
            re += np.bincount(idx, weights=conv.real.ravel(), minlength=self.n_bins)
            im += np.bincount(idx, weights=conv.imag.ravel(), minlength=self.n_bins)
        return re + 1j * im

    def lhs(self, Vu: np.ndarray, Vw: np.ndarray, s: float) -> tuple[float, float]:
        """(weighted L^1_tau quantity, (1, s, -1/2) norm) of G1(u, w)."""
        G = np.abs(self.coefficients(Vu, Vw))
        js = japanese(self.bin_sigma)
        nmin = self.bin_n.min()
        nidx = self.bin_n - nmin
        nn = np.arange(nidx.max() + 1) + nmin
        wn = japanese(nn) ** (2 * s)
        l1 = np.bincount(nidx, weights=G / js, minlength=nn.size)
        l2 = np.bincount(nidx, weights=G**2 / js, minlength=nn.size)
        return float(np.sqrt(np.sum(wn * l1**2))), float(np.sqrt(np.sum(wn * l2)))


@dataclass
class TrilinearReport:
    n_values: tuple[int, ...]
    lhs_l1: dict[int, np.ndarray] = field(default_factory=dict)
    lhs_l2: dict[int, np.ndarray] = field(default_factory=dict)
    rhs: dict[int, np.ndarray] = field(default_factory=dict)
    skipped: dict[int, int] = field(default_factory=dict)
    scale_deviation: float = 0.0

    def ratios(self, n: int, which: str = "l1") -> np.ndarray:
        lhs = self.lhs_l1[n] if which == "l1" else self.lhs_l2[n]
        return lhs / self.rhs[n]

    def max_ratio(self, n: int, which: str = "l1") -> float:
        return float(np.max(self.ratios(n, which)))

    def growth(self, which: str = "l1") -> float:
        m = [self.max_ratio(n, which) for n in self.n_values]
        return float(max(b / a for a, b in zip(m[:-1], m[1:]))) if len(m) > 1 else 1.0

    def rows(self, n: int):
        for i, (a, r) in enumerate(zip(self.lhs_l1[n], self.rhs[n])):
            yield i, a, r, a / r


def trilinear_ratio_experiment(
    config: EstimateConfig,
    params: PhysicsParams,
    n_values: tuple[int, ...] = (32, 64),
    scale: float = 3.7,
    workers: int = 1,
) -> TrilinearReport:
    """LHS/f(u,w) over a seeded lattice ensemble for each N, plus a homogeneity check.

    Members are drawn sequentially from the seed and may be evaluated on up
    to ``workers`` threads; results are collected in member order.
    """
    rep = TrilinearReport(tuple(n_values))
    for n in n_values:
        ker = TrilinearKernel(n, config.band, params)
        rng = np.random.default_rng([config.seed, n])
        members = [lattice_ensemble_member(n, config.s, config.band, rng) for _ in range(config.ensemble_size)]

        def evaluate(m):
            Vu, Vw = m
            f = trilinear_rhs(Vu, Vw, config.s, config.theta)
            if not f > 0:
                return None
            return (*ker.lhs(Vu, Vw, config.s), f)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as ex:
                results = list(ex.map(evaluate, members))
        else:
            results = [evaluate(m) for m in members]
        kept = [r for r in results if r is not None]
        rep.skipped[n] = len(results) - len(kept)
        rep.lhs_l1[n] = np.array([r[0] for r in kept])
        rep.lhs_l2[n] = np.array([r[1] for r in kept])
        rep.rhs[n] = np.array([r[2] for r in kept])
        if kept:
            Vu, Vw = members[results.index(kept[0])]
            a2, _ = ker.lhs(scale * Vu, scale * Vw, config.s)
            f2 = trilinear_rhs(scale * Vu, scale * Vw, config.s, config.theta)
            base = kept[0][0] / kept[0][2]
            rep.scale_deviation = max(rep.scale_deviation, abs(a2 / f2 - base) / base)
    return rep
