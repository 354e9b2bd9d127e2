"""Classical field functions of the two-mode signal and their brackets.

Covers the steady state, the orientation angle and its exponential, the
rotating quadrature seen by an orthogonal local oscillator, single-mode
quadratures, closed-form bracket values, and the transverse profiles of the
L+1 / L-1 / bright / LO modes with grid quadrature.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .wirtinger import (
    ALPHA_M,
    ALPHA_M_CONJ,
    ALPHA_P,
    ALPHA_P_CONJ,
    DEFAULT_EPS,
    DomainError,
    Field,
    ModePoint,
    conj,
    log,
    modulus,
    sqrt,
)


def wrap_angle(a):
    """Map angles into (-pi, pi]."""
    w = np.pi - np.mod(np.pi - np.asarray(a, dtype=float), 2 * np.pi)
    return float(w) if np.ndim(w) == 0 else w


class OrientationConvention(enum.Enum):
    #: the plain ratio a+* a- / (|a+||a-|): the full phase difference
    FULL_ANGLE = "full"
    #: principal square root of that ratio: half the phase difference
    HALF_ANGLE = "half"


FULL_ANGLE = OrientationConvention.FULL_ANGLE
HALF_ANGLE = OrientationConvention.HALF_ANGLE


@dataclass(frozen=True)
class SteadyState:
    rho: float
    theta0: float

    def __post_init__(self):
        if self.rho < 0:
            raise ValueError("rho must be nonnegative")


def steady_state(s: SteadyState) -> ModePoint:
    """Classical emission ``(rho e^{-i theta0}, rho e^{+i theta0})``."""
    th = wrap_angle(s.theta0)
    return ModePoint(s.rho * np.exp(-1j * th), s.rho * np.exp(1j * th))


def symmetric_points(rho, theta0) -> ModePoint:
    """Vectorized steady states over arrays of ``rho`` and ``theta0``."""
    rho = np.asarray(rho, dtype=float)
    th = wrap_angle(theta0)
    return ModePoint(rho * np.exp(-1j * th), rho * np.exp(1j * th))


# --------------------------------------------------------------------------
# field functions


def exp_orientation(c: OrientationConvention = HALF_ANGLE) -> Field:
    ratio = (ALPHA_P_CONJ * ALPHA_M) / (modulus(ALPHA_P) * modulus(ALPHA_M))
    if c is FULL_ANGLE:
        return ratio
    return sqrt(ratio)


def orientation(c: OrientationConvention = HALF_ANGLE) -> Field:
    """Orientation angle (1/i) ln e^{i theta}; real-valued on its domain."""
    return log(exp_orientation(c)) / 1j


def rotating_quadrature(psi_L: float, c: OrientationConvention = HALF_ANGLE) -> Field:
    """X^psi = (i/sqrt2) e^{-i psi} (e^{i theta} a+ - e^{-i theta} a-) + c.c."""
    e = exp_orientation(c)
    inner = (1j / np.sqrt(2)) * np.exp(-1j * psi_L) * (e * ALPHA_P - ALPHA_M / e)
    return inner + conj(inner)


def single_mode_quadratures(j: int) -> tuple[Field, Field]:
    """``(X_j, Y_j)`` with X = a + a*, Y = -i (a - a*), for j in {+1, -1}."""
    if j == 1:
        a, ac = ALPHA_P, ALPHA_P_CONJ
    elif j == -1:
        a, ac = ALPHA_M, ALPHA_M_CONJ
    else:
        raise ValueError("mode index must be +1 or -1")
    return a + ac, -1j * (a - ac)


# --------------------------------------------------------------------------
# closed forms


def _moduli(p: ModePoint, eps: float):
    rp, rm = (np.asarray(r, dtype=float) for r in p.moduli())
    if np.any(rp < eps) or np.any(rm < eps):
        raise DomainError("modulus", "closed form needs both |alpha_j| above epsilon")
    return rp, rm


def closed_form_quadrature_bracket(p: ModePoint, eps: float = DEFAULT_EPS):
    """(|a-| - |a+|) / (2 |a+| |a-|)."""
    rp, rm = _moduli(p, eps)
    out = (rm - rp) / (2 * rp * rm)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class OrientationBracket:
    value: complex
    #: True when the value comes from the literal asymmetric formula, whose
    #: second factor repeats |a-| and is not trusted
    typo_suspect: bool


def closed_form_orientation_bracket(
    p: ModePoint, psi_L: float, eps: float = DEFAULT_EPS, rtol: float = 1e-12
) -> OrientationBracket:
    """Closed-form {X^psi, theta}.

    At |a+| = |a-| = rho this is -sin(psi)/(sqrt2 rho). Elsewhere the
    literal asymmetric expression is returned verbatim and flagged.
    """
    rp, rm = _moduli(p, eps)
    rp, rm = float(rp), float(rm)
    if abs(rp - rm) <= rtol * max(rp, rm):
        rho = 0.5 * (rp + rm)
        return OrientationBracket(complex(-np.sin(psi_L) / (np.sqrt(2) * rho)), False)
    num = 1j * (rp + rm) * (np.exp(1j * psi_L) * rm - np.exp(-1j * psi_L) * rm)
    return OrientationBracket(complex(num / (4 * np.sqrt(2) * rp**1.5 * rm**1.5)), True)


def symmetric_orientation_bracket(rho, psi_L):
    """-sin(psi)/(sqrt2 rho), the dominant term at equal photon numbers."""
    return -np.sin(psi_L) / (np.sqrt(2) * np.asarray(rho, dtype=float))


# --------------------------------------------------------------------------
# transverse modes


class ModeKind(enum.Enum):
    L_PLUS = "Lplus"
    L_MINUS = "Lminus"
    BRIGHT = "Bright"
    LO = "LO"


@dataclass(frozen=True)
class CartesianGrid:
    """Square grid on [-extent, extent]^2 with ``n`` samples per axis."""

    extent: float
    n: int

    def __post_init__(self):
        if self.extent <= 0 or self.n < 3:
            raise ValueError("grid needs positive extent and at least 3 samples")

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.extent, self.extent, self.n)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.axis, self.axis, indexing="xy")


@dataclass(frozen=True)
class TransverseModeParams:
    w: float
    theta0: float = 0.0
    rho: float = 1.0
    rho_L: float = 1.0
    psi_L: float = 0.0

    def __post_init__(self):
        if self.w <= 0:
            raise ValueError("beam width must be positive")


def laguerre_gauss(sign: int, w: float, x, y):
    """L_{+-1} = pi^{-1/2} w^{-2} r e^{-r^2/2w^2} e^{+-i phi}."""
    # r e^{+-i phi} = x +- i y
    r2 = np.asarray(x) ** 2 + np.asarray(y) ** 2
    return (x + sign * 1j * np.asarray(y)) * np.exp(-r2 / (2 * w**2)) / (np.sqrt(np.pi) * w**2)


def mode_profile(kind, params: TransverseModeParams, x, y):
    """Unit-normalized transverse profile sampled at Cartesian ``(x, y)``."""
    kind = ModeKind(kind)
    lp = laguerre_gauss(+1, params.w, x, y)
    lm = laguerre_gauss(-1, params.w, x, y)
    if kind is ModeKind.L_PLUS:
        return lp
    if kind is ModeKind.L_MINUS:
        return lm
    ep, em = np.exp(-1j * params.theta0), np.exp(1j * params.theta0)
    if kind is ModeKind.BRIGHT:
        # e^{-i t} L+ + e^{i t} L- = 2 pi^{-1/2} w^{-2} r e^{..} cos(phi - t)
        return (ep * lp + em * lm) / np.sqrt(2)
    # e^{-i t} L+ - e^{i t} L- = 2i (...) sin(phi - t); drop the i
    return (ep * lp - em * lm) / (1j * np.sqrt(2))


def bright_envelope(params: TransverseModeParams, x, y):
    """Signal envelope rho (e^{-i theta} L+ + e^{i theta} L-)."""
    return params.rho * np.sqrt(2) * mode_profile(ModeKind.BRIGHT, params, x, y)


def lo_envelope(params: TransverseModeParams, x, y):
    """LO envelope rho_L e^{i psi_L} (e^{-i theta} L+ - e^{i theta} L-)."""
    scale = params.rho_L * np.exp(1j * params.psi_L) * 1j * np.sqrt(2)
    return scale * mode_profile(ModeKind.LO, params, x, y)


@dataclass(frozen=True)
class Overlap:
    value: complex
    #: |I(h) - I(2h)|, difference against the grid with every other sample
    error_estimate: float


def _trapezoid2(f: np.ndarray, dx: float) -> complex:
    return complex(trapezoid(trapezoid(f, dx=dx, axis=1), dx=dx, axis=0))


def overlap(field_a: np.ndarray, field_b: np.ndarray, grid: CartesianGrid) -> Overlap:
    """Trapezoid quadrature of conj(A) B over the grid."""
    field_a, field_b = np.asarray(field_a), np.asarray(field_b)
    if field_a.shape != grid.shape or field_b.shape != grid.shape:
        raise ValueError(
            f"field shapes {field_a.shape}, {field_b.shape} do not match grid {grid.shape}"
        )
    dx = 2 * grid.extent / (grid.n - 1)
    integrand = np.conj(field_a) * field_b
    fine = _trapezoid2(integrand, dx)
    coarse = _trapezoid2(integrand[::2, ::2], 2 * dx)
    return Overlap(fine, abs(fine - coarse))


def gram_matrix(fields, grid: CartesianGrid) -> np.ndarray:
    k = len(fields)
    g = np.empty((k, k), dtype=complex)
    for i in range(k):
        for j in range(k):
            g[i, j] = overlap(fields[i], fields[j], grid).value
    return g
