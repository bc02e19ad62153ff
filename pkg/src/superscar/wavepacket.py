"""Euclidean coherent state, its free evolution and the time-averaged quasimode.

Fourier convention (used everywhere in the package)::

    f_hat(k) = 1/(2 pi) * int f(x) exp(-i k.x) dx
    f(x)     = 1/(2 pi) * int f_hat(k) exp(i k.x) dk

The propagator is U_t = exp(i t Delta), so a plane wave exp(i k.x) picks up
exp(-i t |k|^2) and packets travel with group velocity 2k.
"""
from dataclasses import dataclass, field
import math
from typing import Callable

import numpy as np

from .quadrature import adaptive_gl, composite_nodes, PANEL_ORDER

ENVELOPE_CUT = 9.0  # Gaussian widths beyond which a packet is treated as zero


def unit_vector(v, tol=1e-14):
    v = np.asarray(v, dtype=float)
    n = math.hypot(v[0], v[1])
    if n == 0.0:
        raise ValueError("direction must be non-zero")
    if abs(n - 1.0) > tol:
        v = v / n
    return v


@dataclass(frozen=True)
class SemiclassicalParams:
    """Semiclassical parameter hbar, cutoff exponent epsilon, and phase-space
    centre (x0, xi0).  The quasi-energy is always lambda = hbar**-2."""

    hbar: float
    epsilon: float = 0.05
    x0: tuple = (0.0, 0.0)
    xi0: tuple = (1.0, 0.0)

    def __post_init__(self):
        if not 0.0 < self.hbar < 1.0:
            raise ValueError("hbar must lie in (0, 1)")
        object.__setattr__(self, "x0", tuple(float(c) for c in self.x0))
        object.__setattr__(self, "xi0", tuple(unit_vector(self.xi0)))

    @property
    def lam(self):
        return self.hbar ** -2

    @property
    def momentum(self):
        """Centre of the momentum profile in k units, xi0/hbar."""
        return np.asarray(self.xi0) / self.hbar

    @property
    def cutoff_radius(self):
        return self.hbar ** (0.5 - self.epsilon)

    def replace(self, **kw):
        d = dict(hbar=self.hbar, epsilon=self.epsilon, x0=self.x0, xi0=self.xi0)
        d.update(kw)
        return SemiclassicalParams(**d)


def gaussian(x):
    """Standard Gaussian gamma(x) = exp(-|x|^2/2)/(2 pi); self-dual."""
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * np.sum(x * x, axis=-1)) / (2.0 * np.pi)


def coherent_state_value(params, x):
    """phi_0(x) = sqrt(pi/hbar) gamma((x-x0)/sqrt(hbar)) exp(i xi0.x/hbar)."""
    x = np.asarray(x, dtype=float)
    h = params.hbar
    y = x - np.asarray(params.x0)
    phase = x @ np.asarray(params.xi0) / h
    return math.sqrt(math.pi / h) * gaussian(y / math.sqrt(h)) * np.exp(1j * phase)


def _evolved_exponent(params, t, x):
    """log of U_t phi_0(x) without the constant prefactor, broadcasting t
    against the leading axes of x.  Returns (log_amp, log_phase_free)."""
    h = params.hbar
    p = params.momentum
    x = np.asarray(x, dtype=float)
    y0 = x[..., 0] - params.x0[0]
    y1 = x[..., 1] - params.x0[1]
    sigma = h + 2j * t
    d0 = y0 - 2.0 * t * p[0]
    d1 = y1 - 2.0 * t * p[1]
    return (np.log(h / sigma) - (d0 * d0 + d1 * d1) / (2.0 * sigma)
            + 1j * (x[..., 0] * p[0] + x[..., 1] * p[1]))


def free_evolution_value(params, t, x):
    """U_t phi_0(x) in closed form.

    Evolving exp(-|y|^2/(2 hbar) + i p.x) under exp(i t Delta) replaces the
    width hbar by sigma = hbar + 2 i t, moves the centre to x0 + 2 t p and
    multiplies by (hbar / sigma) exp(-i t |p|^2), with p = xi0/hbar.
    """
    amp = 1.0 / (2.0 * math.sqrt(math.pi * params.hbar))
    p2 = float(params.momentum @ params.momentum)
    t = np.asarray(t, dtype=float)
    return amp * np.exp(_evolved_exponent(params, t, x) - 1j * t * p2)


# ---------------------------------------------------------------- windows

def bump(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    out[inside] = np.exp(-1.0 / (1.0 - si * si))
    return out


def bump_derivative(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    q = 1.0 - si * si
    out[inside] = np.exp(-1.0 / q) * (-2.0 * si / (q * q))
    return out


PROFILES = {"bump": (bump, bump_derivative)}


@dataclass(frozen=True)
class TimeWindow:
    """H(t) = amplitude * H~(t/T) with H~ supported in [-1, 1]."""

    T: float
    kind: str = "bump"
    amplitude: float = 1.0

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("T must be positive")
        if self.kind not in PROFILES:
            raise ValueError(f"unknown window kind {self.kind!r}")

    def profile(self, s):
        return self.amplitude * PROFILES[self.kind][0](s)

    def profile_derivative(self, s):
        return self.amplitude * PROFILES[self.kind][1](s)

    def scaled(self, factor):
        return TimeWindow(self.T, self.kind, self.amplitude * factor)


def window_value(window, t):
    return window.profile(np.asarray(t, dtype=float) / window.T)


def window_derivative_value(window, t):
    return window.profile_derivative(np.asarray(t, dtype=float) / window.T) / window.T


def _profile_transform(profile, mu, chunk=4096):
    # int_{-1}^{1} profile(s) exp(-i s mu) ds; even profiles give a real cosine
    # transform, odd ones an imaginary sine transform
    mu = np.asarray(mu, dtype=float)
    flat = mu.ravel()
    out = np.empty(flat.shape, dtype=complex)
    mmax = float(np.max(np.abs(flat))) if flat.size else 0.0
    panels = 16 + int(math.ceil(mmax / math.pi))
    s, w = composite_nodes(0.0, 1.0, panels)
    even = profile(s)
    odd_check = profile(-s)
    is_even = np.allclose(odd_check, even, rtol=0, atol=1e-300)
    for i in range(0, flat.size, chunk):
        m = flat[i:i + chunk]
        arg = np.outer(m, s)
        if is_even:
            out[i:i + chunk] = 2.0 * (np.cos(arg) @ (w * even))
        else:
            out[i:i + chunk] = -2j * (np.sin(arg) @ (w * even))
    return out.reshape(mu.shape)


def window_transform(window, mu):
    """W(mu) = T * int H~(s) exp(-i s mu) ds (the time-averaging filter)."""
    return window.T * _profile_transform(window.profile, mu)


def window_derivative_transform(window, mu):
    """int H~'(s) exp(-i s mu) ds; equals i mu W(mu) / T."""
    return _profile_transform(window.profile_derivative, mu)


# ---------------------------------------------------------------- quasimode

@dataclass(frozen=True)
class EuclideanQuasimodeEval:
    params: SemiclassicalParams
    window: TimeWindow
    rtol: float = 1e-9
    max_nodes: int = 2 ** 16

    @property
    def envelope_width(self):
        """Largest Gaussian width reached by the packet within the window."""
        h, T = self.params.hbar, self.window.T
        return math.sqrt((h * h + 4.0 * T * T) / h)

    @property
    def travel(self):
        """Half-length of the segment swept by the packet centre."""
        return 2.0 * self.window.T / self.params.hbar

    def support_mask(self, x):
        """Points where the averaged packet is not negligible."""
        x = np.asarray(x, dtype=float)
        y = x - np.asarray(self.params.x0)
        xi = np.asarray(self.params.xi0)
        s = np.clip(y @ xi, -self.travel, self.travel)
        d = y - s[..., None] * xi
        dist2 = np.sum(d * d, axis=-1)
        return dist2 <= (ENVELOPE_CUT * self.envelope_width) ** 2


def _time_integral(ev, x, weight, rtol=None, chunk=2048):
    x = np.asarray(x, dtype=float)
    shape = x.shape[:-1]
    pts = x.reshape(-1, 2)
    out = np.zeros(len(pts), dtype=complex)
    mask = ev.support_mask(pts)
    idx = np.nonzero(mask)[0]
    if idx.size == 0:
        return out.reshape(shape)
    h, T = ev.params.hbar, ev.window.T
    amp = 1.0 / (2.0 * math.sqrt(math.pi * h))
    detune = (1.0 - float(np.dot(ev.params.xi0, ev.params.xi0))) / (h * h)
    panels = max(2, int(math.ceil(2.0 * T / h ** 1.5)))
    tol = ev.rtol if rtol is None else rtol

    for start in range(0, idx.size, chunk):
        sel = idx[start:start + chunk]
        sub = pts[sel][:, None, :]

        def f(t, sub=sub):
            e = _evolved_exponent(ev.params, t[None, :], sub)
            return weight(t)[None, :] * np.exp(e + 1j * t[None, :] * detune)

        val, _ = adaptive_gl(f, -T, T, rtol=tol, panels=panels,
                             max_nodes=ev.max_nodes)
        out[sel] = amp * val
    return out.reshape(shape)


def euclidean_quasimode_value(ev, x, rtol=None):
    """Phi_lambda(x) = int H(t) exp(i t lambda) U_t phi_0(x) dt."""
    return _time_integral(ev, x, lambda t: window_value(ev.window, t), rtol)


def defect_field_value(ev, x, rtol=None):
    """(Delta + lambda) Phi_lambda(x) = i int H'(t) exp(i t(Delta+lambda)) phi_0 dt."""
    return 1j * _time_integral(
        ev, x, lambda t: window_derivative_value(ev.window, t), rtol)


def coherent_state_transform(params, k):
    """phi_0_hat(k) = sqrt(pi hbar) gamma(sqrt(hbar)(k - p)) exp(-i (k-p).x0)."""
    k = np.asarray(k, dtype=float)
    h = params.hbar
    dk = k - params.momentum
    return (math.sqrt(math.pi * h) * gaussian(math.sqrt(h) * dk)
            * np.exp(-1j * (dk @ np.asarray(params.x0))))


def _mu(ev, k):
    k = np.asarray(k, dtype=float)
    return ev.window.T * (np.sum(k * k, axis=-1) - ev.params.lam)


def quasimode_transform(ev, k):
    """Phi_hat(k) = phi_0_hat(k) W(T(|k|^2 - lambda)) in k units."""
    return coherent_state_transform(ev.params, k) * window_transform(ev.window, _mu(ev, k))


def defect_transform(ev, k):
    """Fourier transform of (Delta + lambda) Phi_lambda, via H'."""
    return (1j * coherent_state_transform(ev.params, k)
            * window_derivative_transform(ev.window, _mu(ev, k)))


def quasimode_momentum_profile(ev, xi):
    """Phi_hat(xi/hbar) for semiclassical momenta xi."""
    return quasimode_transform(ev, np.asarray(xi, dtype=float) / ev.params.hbar)


def momentum_lattice(ev, box=None, k_sigma=12.0):
    """Momentum lattice (k points, spacing) on which the inverse transform is exact.

    Phi is treated as supported in a square of side ``box`` around x0; the
    trapezoid rule in k with spacing 2 pi / box then reproduces Phi up to the
    Gaussian tails cut at ``k_sigma`` widths.
    """
    if box is None:
        box = 2.0 * (ev.travel + ENVELOPE_CUT * ev.envelope_width)
    dk = 2.0 * np.pi / box
    half = int(math.ceil(k_sigma / math.sqrt(ev.params.hbar) / dk))
    kk = np.arange(-half, half + 1) * dk
    p = ev.params.momentum
    # centre the lattice on integer multiples of dk so it is reproducible
    c0 = np.round(p / dk) * dk
    K = np.stack(np.meshgrid(c0[0] + kk, c0[1] + kk, indexing="ij"), axis=-1)
    return K, dk


def momentum_route_value(ev, x, box=None, k_sigma=12.0, transform=None):
    """Phi_lambda(x) as (1/2pi) sum_k Phi_hat(k) exp(i k.x) dk^2 over a lattice."""
    K, dk = momentum_lattice(ev, box, k_sigma)
    F = (quasimode_transform if transform is None else transform)(ev, K).ravel()
    Kf = K.reshape(-1, 2)
    x = np.asarray(x, dtype=float)
    pts = x.reshape(-1, 2)
    out = np.empty(len(pts), dtype=complex)
    for i, xx in enumerate(pts):
        out[i] = np.sum(F * np.exp(1j * (Kf @ xx)))
    return (out * dk * dk / (2.0 * np.pi)).reshape(x.shape[:-1])
