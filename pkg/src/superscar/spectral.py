"""Norm, defect and spectral width of the Euclidean quasimode.

Everything here goes through the autocorrelation identity

    ||Phi||^2 = 1/2 int g(v) <phi_0, exp(i v (Delta + lambda)) phi_0> dv,

with g the autocorrelation of the time window (or of its derivative for the
defect), so the whole computation is a 1-D quadrature in v.
"""
from dataclasses import dataclass, field
from functools import lru_cache
import math
import warnings

import numpy as np
import sympy as sp

from .bessel import bessel_ie
from .errors import CrossCheckFailed, NonRealNorm, OrderTooLarge
from .quadrature import adaptive_gl, adaptive_periodic, composite_nodes
from .wavepacket import TimeWindow

N_MAX = 8
TAYLOR_DEGREE = 40
TAYLOR_HALF_WIDTH = 0.5


# ------------------------------------------------------------ autocorrelation

@dataclass(frozen=True)
class WindowAutocorrelation:
    """g~(v) = int P((u-v)/2) P((u+v)/2) du for the window profile P (or P').

    The physical kernel is g(v) = T g~(v/T) for the window and g~(v/T)/T for
    its derivative.
    """

    window: TimeWindow
    derivative: bool = False
    inner_panels: int = 24

    def _profile(self, s):
        if self.derivative:
            return self.window.profile_derivative(s)
        return self.window.profile(s)

    def reduced(self, v):
        """g~ on [-2, 2]; identically zero outside."""
        v = np.abs(np.asarray(v, dtype=float))
        flat = v.ravel()
        out = np.zeros(flat.shape)
        s, w = composite_nodes(-1.0, 1.0, self.inner_panels)
        inside = flat < 2.0
        half = 2.0 - flat[inside]
        # u = half * s on [-half, half]
        u = half[:, None] * s[None, :]
        vv = flat[inside][:, None]
        vals = self._profile((u - vv) / 2.0) * self._profile((u + vv) / 2.0)
        out[inside] = half * (vals @ w)
        return out.reshape(v.shape)

    def kernel(self, v):
        T = self.window.T
        g = self.reduced(np.asarray(v, dtype=float) / T)
        return g / T if self.derivative else T * g

    @property
    def a0(self):
        return float(self.reduced(0.0))

    def taylor_coefficients(self, order):
        """Even Taylor coefficients a_l = g~^(2l)(0)/(2l)!, l = 0..order."""
        cheb = np.polynomial.Chebyshev.interpolate(
            self.reduced, TAYLOR_DEGREE,
            domain=[-TAYLOR_HALF_WIDTH, TAYLOR_HALF_WIDTH])
        coeffs = []
        for ell in range(order + 1):
            d = cheb.deriv(2 * ell)(0.0) if ell else cheb(0.0)
            coeffs.append(float(d) / math.factorial(2 * ell))
        return np.array(coeffs)


def autocorrelation(window, derivative=False):
    return WindowAutocorrelation(window, derivative)


# ------------------------------------------------------------------ overlap

def overlap_closed_form(hbar, v):
    """<phi_0, exp(i v (Delta + lambda)) phi_0> for |xi0| = 1, lambda = hbar^-2.

    Completing the square in the momentum integral gives
    hbar / (4 a) * exp(-v^2 / (hbar^2 a)) with a = hbar - i v.
    """
    v = np.asarray(v, dtype=float)
    a = hbar - 1j * v
    return hbar / (4.0 * a) * np.exp(-v * v / (hbar * hbar * a))


def angular_F(hbar, rho, rtol=1e-13):
    """F(rho) = int_0^{2pi} exp(-(hbar rho + 1/hbar - 2 sqrt(rho) cos th)) dth."""
    rho = np.asarray(rho, dtype=float)
    r = np.sqrt(rho)[..., None]
    base = (hbar * rho + 1.0 / hbar)[..., None]

    def f(theta):
        return np.exp(-(base - 2.0 * r * np.cos(theta)))

    return adaptive_periodic(f, rtol=rtol, n=64)


def overlap_polar(hbar, v, rtol=1e-10):
    """The same overlap via (hbar/8pi) int_0^inf F(rho) exp(i v (rho - lambda)) drho.

    F is entire in rho, so the rho path is bent through the saddle point
    rho* = 1/a^2 (a = hbar - i v) of the integrand and then leaves along
    conj(a).  On the real axis the integrand oscillates and cancels down to
    exp(-1/hbar) and below, which double precision cannot resolve; along this
    path it stays of the size of the result.  ``F`` itself is still the
    numerical angular integral, so the route does not use the closed form.
    """
    v_in = np.asarray(v, dtype=float)
    out = np.array([_overlap_polar_one(hbar, float(vi), rtol) for vi in v_in.ravel()])
    return out.reshape(v_in.shape)


def _overlap_polar_one(hbar, v, rtol):
    lam = hbar ** -2
    a = hbar - 1j * v
    ra = abs(a)
    rho_s = 1.0 / (a * a)
    u = np.conj(a) / ra
    ref = 1.0 / a  # integrand exponent at the saddle

    def g(rho):
        # exp(-ref) * int exp(-h rho + 2 sqrt(rho) cos th) dth * exp(i v rho)
        r = np.sqrt(rho)[..., None]
        shift = (-hbar * rho + 1j * v * rho - ref)[..., None]

        def f(theta):
            return np.exp(shift + 2.0 * r * np.cos(theta))

        return adaptive_periodic(f, rtol=1e-14, n=64)

    seg, _ = adaptive_gl(lambda s: g(s * rho_s) * rho_s, 0.0, 1.0, rtol=rtol, panels=8,
                         max_nodes=2 ** 18)
    s_max = 40.0 / ra + 24.0 / ra ** 1.5
    tail, _ = adaptive_gl(lambda s: g(rho_s + s * u) * u, 0.0, s_max, rtol=rtol, panels=16,
                          max_nodes=2 ** 18)
    scale = np.exp(ref - 1.0 / hbar - 1j * v * lam)
    return hbar / (8.0 * math.pi) * (seg + tail) * scale


def overlap_value(params, v, check=False, rtol=1e-6):
    """Closed-form overlap; with ``check`` also evaluate the polar route."""
    a = overlap_closed_form(params.hbar, v)
    if check:
        b = overlap_polar(params.hbar, v).reshape(np.shape(a))
        rel = np.abs(a - b) / np.abs(a)
        if np.any(rel > rtol):
            raise CrossCheckFailed(f"overlap routes disagree: {np.max(rel):.3g}")
    return a


# ------------------------------------------------------- expansion polynomials

@lru_cache(maxsize=None)
def _q_symbolic(ell):
    s, x, h = sp.symbols("s x hbar")
    P = sp.Integer(1)
    # f = exp(-(h rho + 1/h - 2 sqrt(rho) x)), s = rho^(-1/2), ds/drho = -s^3/2
    for _ in range(ell):
        P = sp.expand(sp.diff(P, s) * (-s ** 3 / 2) + P * (-h + s * x))
    q = sp.expand(P.subs(s, h) / h ** ell)
    return sp.Poly(q, x)


def q_polynomial(ell, n_max=N_MAX):
    """q_l as a sympy Poly in x whose coefficients are polynomials in hbar."""
    if ell < 0 or ell > n_max:
        raise OrderTooLarge(f"order {ell} outside 0..{n_max}")
    return _q_symbolic(ell)


def q_coefficients(ell, hbar, n_max=N_MAX):
    """Numeric coefficients of q_l in x, highest degree first."""
    h = sp.Symbol("hbar")
    return np.array([float(c.subs(h, hbar)) for c in q_polynomial(ell, n_max).all_coeffs()])


def _shifted_coefficients(ell, hbar, n_max=N_MAX):
    # q_l(1 + y): the integrand lives near cos th = 1, where the x-basis cancels
    x, y, h = sp.symbols("x y hbar")
    q = q_polynomial(ell, n_max).as_expr().subs(x, y + 1)
    poly = sp.Poly(sp.expand(q), y)
    return np.array([float(c.subs(h, hbar)) for c in poly.all_coeffs()])


def J_integral(hbar, ell, n_max=N_MAX):
    """J_l(2/hbar) = int q_l(cos th) exp(-(2/hbar)(1 - cos th)) dth."""
    coeffs = _shifted_coefficients(ell, hbar, n_max)

    def f(theta):
        y = -2.0 * np.sin(0.5 * theta) ** 2  # cos th - 1 without cancellation
        return np.polyval(coeffs, y) * np.exp((2.0 / hbar) * y)

    return float(adaptive_periodic(f, rtol=1e-13, n=64))


def J0_bessel(hbar):
    """J_0(2/hbar) = 2 pi exp(-2/hbar) I_0(2/hbar)."""
    return 2.0 * math.pi * bessel_ie(0, 2.0 / hbar)


# ----------------------------------------------------------------- norms

def _kernel_integral(params, auto, rtol=1e-10):
    """int g(v) <phi_0, e^{iv(Delta+lambda)} phi_0> dv over [-2T, 2T]."""
    h, T = params.hbar, auto.window.T
    panels = max(4, int(math.ceil(4.0 * T / (0.5 * h ** 1.5))))
    panels = min(panels, 2 ** 11)

    def f(v):
        return auto.kernel(v) * overlap_closed_form(h, v)

    val, _ = adaptive_gl(f, -2.0 * T, 2.0 * T, rtol=rtol, panels=panels,
                         max_nodes=2 ** 18)
    return complex(val)


def _real_part(z, what):
    if abs(z.imag) > 1e-9 * abs(z.real):
        raise NonRealNorm(f"{what} has imaginary part {z.imag:.3g}")
    return z.real


def norm_squared(params, window):
    """||Phi_lambda||^2 from the window autocorrelation."""
    z = 0.5 * _kernel_integral(params, autocorrelation(window))
    return _real_part(z, "norm")


def defect_norm_squared(params, window):
    """||(Delta + lambda) Phi_lambda||^2 from the H' autocorrelation."""
    z = 0.5 * _kernel_integral(params, autocorrelation(window, derivative=True))
    return _real_part(z, "defect norm")


@dataclass
class SpectralWidthReport:
    hbar: float
    T: float
    lam: float
    norm_sq: float
    defect_sq: float
    width: float
    width_times_T: float
    method: str = "autocorrelation"
    extra: dict = field(default_factory=dict)

    def as_row(self):
        return {"hbar": self.hbar, "T": self.T, "lambda": self.lam,
                "norm_sq": self.norm_sq, "defect_sq": self.defect_sq,
                "width": self.width, "width_times_T": self.width_times_T}


def make_report(hbar, T, norm_sq, defect_sq, method, **extra):
    width = math.sqrt(defect_sq / norm_sq)
    return SpectralWidthReport(hbar, T, hbar ** -2, norm_sq, defect_sq, width,
                               width * T, method, dict(extra))


def spectral_width_report(params, window):
    return make_report(params.hbar, window.T, norm_squared(params, window),
                       defect_norm_squared(params, window), "autocorrelation")


# ------------------------------------------------------- expansion check

@dataclass
class ExpansionReport:
    N: int
    direct: float
    partial_sums: list
    residuals: list
    remainder_term: float
    taylor: list
    regime_ok: bool


def lemma_expansion_check(params, window, N):
    """Compare int g <phi_0, e^{iv(Delta+lambda)} phi_0> dv with its expansion

        (hbar T / 4) sum_l a_l (-1)^l (hbar/T)^(2l) J_{2l}(2/hbar).
    """
    h, T = params.hbar, window.T
    regime_ok = T < h
    if not regime_ok:
        warnings.warn("expansion is only expected to improve with N when T < hbar")
    auto = autocorrelation(window)
    direct = _real_part(_kernel_integral(params, auto, rtol=1e-12), "kernel integral")
    a = auto.taylor_coefficients(N + 1)
    ratio = (h / T) ** 2
    partial, total = [], 0.0
    for ell in range(N + 1):
        total += a[ell] * (-1) ** ell * ratio ** ell * J_integral(h, 2 * ell)
        partial.append(h * T / 4.0 * total)
    remainder = h * T / 4.0 * abs(a[N + 1]) * ratio ** (N + 1) * abs(J_integral(h, 2 * N + 2))
    residuals = [abs(s - direct) / abs(direct) for s in partial]
    return ExpansionReport(N, direct, partial, residuals, remainder, list(a), regime_ok)
