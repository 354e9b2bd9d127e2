"""Forward-mode Wirtinger differentiation over the two mode amplitudes.

A field function is an expression tree over the four independent slots
``alpha_plus``, ``conj(alpha_plus)``, ``alpha_minus`` and ``conj(alpha_minus)``.
Evaluating it at a :class:`ModePoint` propagates a :class:`WirtingerDual`
carrying the value and the four partial derivatives, which is all the Poisson
bracket needs.

Values may be complex scalars or numpy arrays of equal shape, so one
evaluation can sweep many phase-space points at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

Number = Union[complex, float, np.ndarray]

DEFAULT_EPS = 1e-9


class DomainError(ValueError):
    """Raised when a primitive is evaluated outside its domain."""

    def __init__(self, primitive: str, detail: str):
        self.primitive = primitive
        super().__init__(f"{primitive}: {detail}")


@dataclass(frozen=True)
class ModePoint:
    """Classical phase-space point (alpha_plus, alpha_minus)."""

    alpha_plus: Number
    alpha_minus: Number

    def moduli(self) -> tuple[Number, Number]:
        return np.abs(self.alpha_plus), np.abs(self.alpha_minus)

    def check_finite(self) -> None:
        if not (np.all(np.isfinite(self.alpha_plus)) and np.all(np.isfinite(self.alpha_minus))):
            raise ValueError("mode point has non-finite components")


@dataclass(frozen=True)
class WirtingerDual:
    """A complex value with its partials w.r.t. a+, a+*, a-, a-*."""

    value: Number
    d_ap: Number = 0j
    d_ap_conj: Number = 0j
    d_am: Number = 0j
    d_am_conj: Number = 0j

    @property
    def partials(self) -> tuple[Number, Number, Number, Number]:
        return (self.d_ap, self.d_ap_conj, self.d_am, self.d_am_conj)

    def _chain(self, value: Number, scale: Number) -> "WirtingerDual":
        # holomorphic g(u): every partial picks up g'(u)
        return WirtingerDual(value, *(scale * d for d in self.partials))

    def __add__(self, other: "WirtingerDual") -> "WirtingerDual":
        return WirtingerDual(
            self.value + other.value,
            *(a + b for a, b in zip(self.partials, other.partials)),
        )

    def __sub__(self, other: "WirtingerDual") -> "WirtingerDual":
        return WirtingerDual(
            self.value - other.value,
            *(a - b for a, b in zip(self.partials, other.partials)),
        )

    def __neg__(self) -> "WirtingerDual":
        return WirtingerDual(-self.value, *(-d for d in self.partials))

    def __mul__(self, other: "WirtingerDual") -> "WirtingerDual":
        u, v = self.value, other.value
        return WirtingerDual(
            u * v, *(a * v + u * b for a, b in zip(self.partials, other.partials))
        )

    def __truediv__(self, other: "WirtingerDual") -> "WirtingerDual":
        u, v = self.value, other.value
        q = u / v
        return WirtingerDual(
            q, *((a - q * b) / v for a, b in zip(self.partials, other.partials))
        )

    def conj(self) -> "WirtingerDual":
        # d(F*)/d a = conj(dF/d a*)
        return WirtingerDual(
            np.conj(self.value),
            np.conj(self.d_ap_conj),
            np.conj(self.d_ap),
            np.conj(self.d_am_conj),
            np.conj(self.d_am),
        )


def _as_complex(x: Number) -> Number:
    return np.asarray(x, dtype=complex) if isinstance(x, np.ndarray) else complex(x)


def lift_point(p: ModePoint) -> tuple[WirtingerDual, WirtingerDual, WirtingerDual, WirtingerDual]:
    """Seed the four differentiation slots at ``p``.

    Returns duals for ``(a+, a+*, a-, a-*)`` in that order.
    """
    p.check_finite()
    ap = _as_complex(p.alpha_plus)
    am = _as_complex(p.alpha_minus)
    zero = ap * 0 + am * 0
    one = zero + 1
    return (
        WirtingerDual(ap + zero, one, zero, zero, zero),
        WirtingerDual(np.conj(ap) + zero, zero, one, zero, zero),
        WirtingerDual(am + zero, zero, zero, one, zero),
        WirtingerDual(np.conj(am) + zero, zero, zero, zero, one),
    )


# --------------------------------------------------------------------------
# expression tree


def _check_branch(name: str, u: Number, eps: float) -> None:
    u = np.asarray(u)
    if np.any(np.abs(u) < eps):
        raise DomainError(name, "argument within epsilon of zero")
    if np.any((u.real < 0) & (np.abs(u.imag) < eps)):
        raise DomainError(name, "argument within epsilon of the negative real branch cut")


def _check_modulus(u: Number, eps: float) -> None:
    if np.any(np.abs(u) < eps):
        raise DomainError("modulus", "|z| below epsilon")


class Field:
    """Node of a field-function expression tree.

    Build functions with the module-level variables and primitives, e.g.
    ``(ALPHA_P * conj(ALPHA_M)) / modulus(ALPHA_P)``. Python numbers are
    promoted to constants.
    """

    def __call__(self, p: ModePoint) -> WirtingerDual:
        return evaluate(self, p)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other) -> "Field":
        return _Binary("add", self, _lift(other))

    def __radd__(self, other) -> "Field":
        return _Binary("add", _lift(other), self)

    def __sub__(self, other) -> "Field":
        return _Binary("sub", self, _lift(other))

    def __rsub__(self, other) -> "Field":
        return _Binary("sub", _lift(other), self)

    def __mul__(self, other) -> "Field":
        return _Binary("mul", self, _lift(other))

    def __rmul__(self, other) -> "Field":
        return _Binary("mul", _lift(other), self)

    def __truediv__(self, other) -> "Field":
        return _Binary("div", self, _lift(other))

    def __rtruediv__(self, other) -> "Field":
        return _Binary("div", _lift(other), self)

    def __neg__(self) -> "Field":
        return _Binary("sub", Const(0), self)

    # evaluation hooks -----------------------------------------------------
    def _dual(self, slots, eps: float) -> WirtingerDual:
        raise NotImplementedError

    def _value(self, slots, eps: float) -> Number:
        raise NotImplementedError


class Const(Field):
    def __init__(self, c: complex):
        self.c = complex(c)

    def _dual(self, slots, eps):
        zero = slots[0].value * 0
        return WirtingerDual(zero + self.c, zero, zero, zero, zero)

    def _value(self, slots, eps):
        return slots[0] * 0 + self.c

    def __repr__(self) -> str:
        return f"Const({self.c})"


class Var(Field):
    """One of the four independent slots (0: a+, 1: a+*, 2: a-, 3: a-*)."""

    _names = ("alpha_plus", "conj(alpha_plus)", "alpha_minus", "conj(alpha_minus)")

    def __init__(self, slot: int):
        if slot not in range(4):
            raise ValueError("slot must be 0..3")
        self.slot = slot

    def _dual(self, slots, eps):
        return slots[self.slot]

    def _value(self, slots, eps):
        return slots[self.slot]

    def __repr__(self) -> str:
        return self._names[self.slot]


def _lift(x) -> Field:
    if isinstance(x, Field):
        return x
    if isinstance(x, (int, float, complex, np.number)):
        return Const(x)
    raise TypeError(f"cannot use {type(x).__name__} in a field expression")


class _Binary(Field):
    def __init__(self, op: str, a: Field, b: Field):
        self.op, self.a, self.b = op, a, b

    def _dual(self, slots, eps):
        u, v = self.a._dual(slots, eps), self.b._dual(slots, eps)
        if self.op == "add":
            return u + v
        if self.op == "sub":
            return u - v
        if self.op == "mul":
            return u * v
        if np.any(v.value == 0):
            raise DomainError("div", "division by zero")
        return u / v

    def _value(self, slots, eps):
        u, v = self.a._value(slots, eps), self.b._value(slots, eps)
        if self.op == "add":
            return u + v
        if self.op == "sub":
            return u - v
        if self.op == "mul":
            return u * v
        if np.any(v == 0):
            raise DomainError("div", "division by zero")
        return u / v

    def __repr__(self) -> str:
        sym = {"add": "+", "sub": "-", "mul": "*", "div": "/"}[self.op]
        return f"({self.a!r} {sym} {self.b!r})"


class _Unary(Field):
    def __init__(self, op: str, a: Field):
        self.op, self.a = op, a

    def _dual(self, slots, eps):
        u = self.a._dual(slots, eps)
        z = u.value
        if self.op == "conj":
            return u.conj()
        if self.op == "exp":
            e = np.exp(z)
            return u._chain(e, e)
        if self.op == "sqrt":
            _check_branch("sqrt", z, eps)
            s = np.sqrt(z)
            return u._chain(s, 0.5 / s)
        if self.op == "log":
            _check_branch("log", z, eps)
            return u._chain(np.log(z), 1.0 / z)
        # modulus: |z| = sqrt(z z*), d|z| = (z* dz + z dz*) / 2|z|
        _check_modulus(z, eps)
        r = np.abs(z) + 0j
        zc = np.conj(z)
        d = u.partials
        return WirtingerDual(
            r,
            (zc * d[0] + z * np.conj(d[1])) / (2 * r),
            (zc * d[1] + z * np.conj(d[0])) / (2 * r),
            (zc * d[2] + z * np.conj(d[3])) / (2 * r),
            (zc * d[3] + z * np.conj(d[2])) / (2 * r),
        )

    def _value(self, slots, eps):
        z = self.a._value(slots, eps)
        if self.op == "conj":
            return np.conj(z)
        if self.op == "exp":
            return np.exp(z)
        if self.op == "sqrt":
            _check_branch("sqrt", z, eps)
            return np.sqrt(z)
        if self.op == "log":
            _check_branch("log", z, eps)
            return np.log(z)
        _check_modulus(z, eps)
        return np.sqrt(z * np.conj(z))

    def __repr__(self) -> str:
        return f"{self.op}({self.a!r})"


def conj(f) -> Field:
    return _Unary("conj", _lift(f))


def sqrt(f) -> Field:
    """Principal square root."""
    return _Unary("sqrt", _lift(f))


def log(f) -> Field:
    """Principal logarithm."""
    return _Unary("log", _lift(f))


def exp(f) -> Field:
    return _Unary("exp", _lift(f))


def modulus(f) -> Field:
    return _Unary("abs", _lift(f))


ALPHA_P = Var(0)
ALPHA_P_CONJ = Var(1)
ALPHA_M = Var(2)
ALPHA_M_CONJ = Var(3)

FieldFunction = Field


# --------------------------------------------------------------------------
# evaluation and brackets


def evaluate(f: Field, p: ModePoint, eps: float = DEFAULT_EPS) -> WirtingerDual:
    """Value and the four Wirtinger partials of ``f`` at ``p``."""
    return f._dual(lift_point(p), eps)


def value(f: Field, p: ModePoint, eps: float = DEFAULT_EPS) -> Number:
    """Plain complex evaluation, no derivative propagation."""
    p.check_finite()
    ap = _as_complex(p.alpha_plus)
    am = _as_complex(p.alpha_minus)
    return f._value((ap, np.conj(ap), am, np.conj(am)), eps)


def bracket_of_duals(F: WirtingerDual, G: WirtingerDual) -> Number:
    s = F.d_ap * G.d_ap_conj - F.d_ap_conj * G.d_ap
    s = s + F.d_am * G.d_am_conj - F.d_am_conj * G.d_am
    return s / 1j


def poisson_bracket(f: Field, g: Field, p: ModePoint, eps: float = DEFAULT_EPS) -> Number:
    """Poisson bracket {f, g} over both modes at ``p``.

    {F, G} = (1/i) sum_j (dF/da_j dG/da_j* - dF/da_j* dG/da_j).
    """
    return bracket_of_duals(evaluate(f, p, eps), evaluate(g, p, eps))


def finite_difference_partials(
    f: Field,
    p: ModePoint,
    h: float = 1e-6,
    richardson: bool = False,
    eps: float = DEFAULT_EPS,
) -> tuple[Number, Number, Number, Number]:
    """Wirtinger partials of ``f`` from central differences.

    Uses d/da = (d/dx - i d/dy) / 2 and d/da* = (d/dx + i d/dy) / 2 on the
    real and imaginary parts of each amplitude. Only plain evaluations of
    ``f`` are used, so this is independent of the dual-number rules.
    """
    if not (np.isfinite(h) and h > 0):
        raise ValueError("step must be a positive finite number")
    ap = _as_complex(p.alpha_plus)
    am = _as_complex(p.alpha_minus)
    for a in (ap, am):
        scale = np.maximum(1.0, np.abs(a))
        if np.any(a + h == a) or np.any(a + 1j * h == a):
            raise ValueError("step underflows against the amplitude")
        if np.any(h > 1e-2 * scale):
            raise ValueError("step too large for a derivative estimate")

    def central(k: int, direction: complex, step: float) -> Number:
        shift = direction * step
        if k == 0:
            plus, minus = ModePoint(ap + shift, am), ModePoint(ap - shift, am)
        else:
            plus, minus = ModePoint(ap, am + shift), ModePoint(ap, am - shift)
        return (value(f, plus, eps) - value(f, minus, eps)) / (2 * step)

    def derivative(k: int, direction: complex) -> Number:
        d1 = central(k, direction, h)
        if not richardson:
            return d1
        d2 = central(k, direction, h / 2)
        return (4 * d2 - d1) / 3

    out = []
    for k in (0, 1):
        fx = derivative(k, 1.0)
        fy = derivative(k, 1j)
        out.append(0.5 * (fx - 1j * fy))
        out.append(0.5 * (fx + 1j * fy))
    return tuple(out)
