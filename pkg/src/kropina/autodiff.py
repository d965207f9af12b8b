"""Forward-mode differentiation.

Two differentiable scalar types live here:

``Dual``
    A first-order dual number whose value and gradient slots may themselves be
    ``Dual`` instances, so derivatives of any order are obtained by nesting.
    Used by :func:`seed` and :func:`derive`.

``Jet``
    A truncated multivariate Taylor polynomial stored densely in numpy.  One jet
    carries every mixed partial up to a fixed order at once, which is what the
    Finsler curvature pipeline needs (sixth-order mixed partials of F**2).

Both support ``+ - * /``, integer powers and the elementary functions exported
below (``sqrt``, ``exp``, ``log``, ``sin``, ``cos``), which also accept floats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Callable, Iterable, Sequence

import numpy as np

# Highest derivative order reachable through `derive` and the default jet order
# used by the Finsler pipeline: R^i_jkl consumes two y-derivatives of R^i_k,
# which consumes two derivatives of G^i, which consumes two of F**2.
MAX_DEPTH = 6

DENOM_EPS = 1e-14


class DomainError(ArithmeticError):
    """Raised on division by ~0, sqrt/log of non-positive values, non-finite results."""


class DepthError(ValueError):
    """Raised when more derivatives are requested than the scalar type carries."""


def _base_value(v) -> float:
    while isinstance(v, (Dual, Jet)):
        v = v.value
    return float(v)


def _check_denominator(v) -> None:
    base = _base_value(v)
    if not math.isfinite(base) or abs(base) < DENOM_EPS:
        raise DomainError(f"division by {base!r}")


# --------------------------------------------------------------------------
# Nested dual numbers
# --------------------------------------------------------------------------


class Dual:
    """Value plus gradient with respect to a fixed list of seed variables."""

    __slots__ = ("value", "grad")
    __array_ufunc__ = None

    def __init__(self, value, grad: Sequence = ()):
        self.value = value
        self.grad = tuple(grad)

    def __repr__(self) -> str:
        return f"Dual({self.value!r}, {list(self.grad)!r})"

    def _coerce(self, other) -> "Dual":
        if isinstance(other, Dual):
            return other
        return Dual(other, (0.0,) * len(self.grad))

    def _zip(self, other: "Dual"):
        if len(self.grad) != len(other.grad):
            # a constant-lifted operand carries an empty gradient
            if not other.grad:
                return self.grad, (0.0,) * len(self.grad)
            if not self.grad:
                return (0.0,) * len(other.grad), other.grad
            raise ValueError("gradient length mismatch")
        return self.grad, other.grad

    def __add__(self, other):
        o = self._coerce(other)
        ga, gb = self._zip(o)
        return Dual(self.value + o.value, [p + q for p, q in zip(ga, gb)])

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.value, [-g for g in self.grad])

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Dual):
            return Dual(self.value * other, [g * other for g in self.grad])
        ga, gb = self._zip(other)
        return Dual(
            self.value * other.value,
            [self.value * q + p * other.value for p, q in zip(ga, gb)],
        )

    __rmul__ = __mul__

    def reciprocal(self) -> "Dual":
        _check_denominator(self.value)
        inv = 1.0 / self.value
        scale = -(inv * inv)
        return Dual(inv, [g * scale for g in self.grad])

    def __truediv__(self, other):
        if not isinstance(other, Dual):
            _check_denominator(other)
            return self * (1.0 / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k):
        return _int_power(self, k)

    def _apply(self, f0, f1) -> "Dual":
        """Chain rule given the value and first derivative of an elementary function."""
        return Dual(f0, [g * f1 for g in self.grad])

    def _sqrt(self):
        if _base_value(self.value) < DENOM_EPS:
            raise DomainError("sqrt of non-positive dual")
        r = sqrt(self.value)
        return self._apply(r, 0.5 / r)

    def _exp(self):
        e = exp(self.value)
        return self._apply(e, e)

    def _log(self):
        _check_denominator(self.value)
        return self._apply(log(self.value), 1.0 / self.value)

    def _sin(self):
        return self._apply(sin(self.value), cos(self.value))

    def _cos(self):
        return self._apply(cos(self.value), -sin(self.value))


def _int_power(x, k):
    if isinstance(k, float) and k.is_integer():
        k = int(k)
    if not isinstance(k, int):
        raise TypeError("only integer powers are supported")
    if k < 0:
        return 1.0 / _int_power(x, -k)
    result = None
    base = x
    while k:
        if k & 1:
            result = base if result is None else result * base
        k >>= 1
        if k:
            base = base * base
    return 1.0 if result is None else result


def seed(values: Sequence[float], which: Iterable[int]) -> list[Dual]:
    """Lift ``values`` to duals with unit seeds on the variables in ``which``.

    The gradient of every returned dual has one slot per selected variable (in
    sorted order); unselected variables are constants.
    """
    which = sorted(set(which))
    for i in which:
        if not 0 <= i < len(values):
            raise IndexError(f"seed index {i} out of range for {len(values)} values")
    out = []
    for i, v in enumerate(values):
        grad = [1.0 if j == i else 0.0 for j in which]
        out.append(Dual(float(v), grad))
    return out


def derive(f: Callable, x: Sequence[float], multi_index: Sequence[int]) -> float:
    """Mixed partial of ``f`` at ``x``, one nested dual level per index.

    ``f`` takes a list of scalars and returns a scalar.
    """
    multi_index = list(multi_index)
    if len(multi_index) > MAX_DEPTH:
        raise DepthError(f"requested order {len(multi_index)} exceeds depth {MAX_DEPTH}")
    for i in multi_index:
        if not 0 <= i < len(x):
            raise IndexError(f"variable index {i} out of range")
    args: list = [float(v) for v in x]
    # innermost level corresponds to the last index
    for i in reversed(multi_index):
        args = [Dual(a, (1.0 if j == i else 0.0,)) for j, a in enumerate(args)]
    out = f(args)
    for _ in multi_index:
        if not isinstance(out, Dual):
            return 0.0
        out = out.grad[0] if out.grad else 0.0
    out = _base_value(out)
    if not math.isfinite(out):
        raise DomainError("non-finite derivative")
    return out


# --------------------------------------------------------------------------
# Truncated Taylor jets
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class JetSpace:
    """Monomial basis for a truncated Taylor expansion.

    A monomial with exponent vector ``m`` is kept when ``sum(m) <= order`` and
    the degree in the first ``nx`` variables is at most ``x_order``.  These
    index sets are closed under division by monomials, so truncated products
    and partial derivatives are exact on the retained coefficients.
    """

    nvars: int
    order: int
    nx: int = 0
    x_order: int = -1

    def __post_init__(self):
        if self.order < 0:
            raise DepthError("jet order exhausted")
        xo = self.order if self.x_order < 0 else min(self.x_order, self.order)
        if self.nx == 0:
            xo = self.order
        object.__setattr__(self, "x_order", xo)

    @property
    def size(self) -> int:
        return len(_basis(self))

    def derived(self, var: int) -> "JetSpace":
        if self.order == 0 or (var < self.nx and self.x_order == 0):
            raise DepthError("derivative beyond the jet's truncation order")
        if var < self.nx:
            return JetSpace(self.nvars, self.order - 1, self.nx, self.x_order - 1)
        return JetSpace(self.nvars, self.order - 1, self.nx, self.x_order)

    def meet(self, other: "JetSpace") -> "JetSpace":
        if self == other:
            return self
        if self.nvars != other.nvars or self.nx != other.nx:
            raise ValueError("jets over different variable sets")
        return JetSpace(
            self.nvars, min(self.order, other.order), self.nx, min(self.x_order, other.x_order)
        )


@lru_cache(maxsize=None)
def _basis(space: JetSpace) -> tuple:
    mons = []
    for deg in range(space.order + 1):
        for combo in combinations_with_replacement(range(space.nvars), deg):
            m = [0] * space.nvars
            for v in combo:
                m[v] += 1
            if sum(m[: space.nx]) <= space.x_order:
                mons.append(tuple(m))
    return tuple(mons)


@lru_cache(maxsize=None)
def _index(space: JetSpace) -> dict:
    return {m: i for i, m in enumerate(_basis(space))}


@lru_cache(maxsize=None)
def _mul_table(space: JetSpace):
    basis = _basis(space)
    index = _index(space)
    ii, jj, kk = [], [], []
    for i, a in enumerate(basis):
        for j, b in enumerate(basis):
            k = index.get(tuple(p + q for p, q in zip(a, b)))
            if k is not None:
                ii.append(i)
                jj.append(j)
                kk.append(k)
    return np.array(ii), np.array(jj), np.array(kk)


@lru_cache(maxsize=None)
def _deriv_map(space: JetSpace, var: int):
    target = space.derived(var)
    src = _index(space)
    idx, fac = [], []
    for m in _basis(target):
        up = list(m)
        up[var] += 1
        idx.append(src[tuple(up)])
        fac.append(float(up[var]))
    return target, np.array(idx), np.array(fac)


@lru_cache(maxsize=None)
def _restrict_map(src: JetSpace, dst: JetSpace):
    index = _index(src)
    return np.array([index[m] for m in _basis(dst)])


@lru_cache(maxsize=None)
def _factorials(space: JetSpace):
    return np.array([float(np.prod([math.factorial(e) for e in m])) for m in _basis(space)])


class Jet:
    """Truncated multivariate Taylor polynomial ``sum_m c[m] * dx**m``."""

    __slots__ = ("space", "c")
    __array_ufunc__ = None

    def __init__(self, space: JetSpace, coeffs: np.ndarray):
        self.space = space
        self.c = coeffs

    @classmethod
    def constant(cls, space: JetSpace, value: float) -> "Jet":
        c = np.zeros(space.size)
        c[0] = value
        return cls(space, c)

    @classmethod
    def variable(cls, space: JetSpace, value: float, var: int) -> "Jet":
        c = np.zeros(space.size)
        c[0] = value
        m = [0] * space.nvars
        m[var] = 1
        if space.order >= 1 and (var >= space.nx or space.x_order >= 1):
            c[_index(space)[tuple(m)]] = 1.0
        return cls(space, c)

    @property
    def value(self) -> float:
        return float(self.c[0])

    def __repr__(self) -> str:
        return f"Jet(order={self.space.order}, value={self.value!r})"

    def restrict(self, space: JetSpace) -> "Jet":
        if space == self.space:
            return self
        return Jet(space, self.c[_restrict_map(self.space, space)])

    def _pair(self, other: "Jet"):
        space = self.space.meet(other.space)
        return space, self.restrict(space).c, other.restrict(space).c

    def __add__(self, other):
        if isinstance(other, Jet):
            space, a, b = self._pair(other)
            return Jet(space, a + b)
        c = self.c.copy()
        c[0] += other
        return Jet(self.space, c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.c)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, Jet):
            space, a, b = self._pair(other)
            return Jet(space, a - b)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            space, a, b = self._pair(other)
            ii, jj, kk = _mul_table(space)
            return Jet(space, np.bincount(kk, weights=a[ii] * b[jj], minlength=len(a)))
        return Jet(self.space, self.c * other)

    __rmul__ = __mul__

    def _nilpotent(self) -> "Jet":
        c = self.c.copy()
        c[0] = 0.0
        return Jet(self.space, c)

    def _compose(self, taylor: Sequence[float]) -> "Jet":
        """Evaluate sum_k taylor[k] * h**k with h the non-constant part (Horner)."""
        h = self._nilpotent()
        order = self.space.order
        result = Jet.constant(self.space, taylor[order])
        for k in range(order - 1, -1, -1):
            result = result * h + taylor[k]
        return result

    def reciprocal(self) -> "Jet":
        a0 = self.value
        _check_denominator(a0)
        return self._compose([(-1.0) ** k / a0 ** (k + 1) for k in range(self.space.order + 1)])

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        _check_denominator(other)
        return Jet(self.space, self.c / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k):
        return _int_power(self, k)

    def _sqrt(self):
        a0 = self.value
        if a0 < DENOM_EPS:
            raise DomainError("sqrt of non-positive jet")
        coeffs, binom = [], 1.0
        for k in range(self.space.order + 1):
            coeffs.append(binom * a0 ** (0.5 - k))
            binom *= (0.5 - k) / (k + 1)
        return self._compose(coeffs)

    def _exp(self):
        e = math.exp(self.value)
        return self._compose([e / math.factorial(k) for k in range(self.space.order + 1)])

    def _log(self):
        a0 = self.value
        if a0 < DENOM_EPS:
            raise DomainError("log of non-positive jet")
        coeffs = [math.log(a0)]
        coeffs += [(-1.0) ** (k + 1) / (k * a0**k) for k in range(1, self.space.order + 1)]
        return self._compose(coeffs)

    def _trig(self, phase: float):
        a0 = self.value
        return self._compose(
            [math.sin(a0 + phase + k * math.pi / 2) / math.factorial(k) for k in range(self.space.order + 1)]
        )

    def _sin(self):
        return self._trig(0.0)

    def _cos(self):
        return self._trig(math.pi / 2)

    # -- derivatives ---------------------------------------------------------

    def d(self, var: int) -> "Jet":
        """Partial derivative as a jet of one lower order."""
        target, idx, fac = _deriv_map(self.space, var)
        return Jet(target, self.c[idx] * fac)

    def partial(self, multi_index: Sequence[int]) -> float:
        """Mixed partial derivative at the expansion point."""
        m = [0] * self.space.nvars
        for v in multi_index:
            m[v] += 1
        k = _index(self.space).get(tuple(m))
        if k is None:
            raise DepthError(f"partial {tuple(multi_index)} not carried by this jet")
        return float(self.c[k] * _factorials(self.space)[k])


def jet_variables(values: Sequence[float], space: JetSpace) -> list[Jet]:
    """Independent jet variables expanded about ``values``."""
    if len(values) != space.nvars:
        raise ValueError("need one value per jet variable")
    return [Jet.variable(space, float(v), i) for i, v in enumerate(values)]


def value_of(v) -> float:
    """Plain float value of a float, Dual or Jet."""
    return _base_value(v)


def jet_values(arr) -> np.ndarray:
    """Apply :func:`value_of` elementwise to a nested list/array."""
    return np.vectorize(value_of, otypes=[float])(np.asarray(arr, dtype=object))


def hessian(f: Callable, x: Sequence[float], block: Sequence[int] | None = None) -> np.ndarray:
    """Matrix of second partials of ``f`` over the ``block`` variables."""
    x = [float(v) for v in x]
    block = list(range(len(x))) if block is None else list(block)
    space = JetSpace(len(block), 2)
    args: list = list(x)
    for k, i in enumerate(block):
        args[i] = Jet.variable(space, x[i], k)
    out = f(args)
    m = len(block)
    H = np.zeros((m, m))
    if isinstance(out, Jet):
        for p in range(m):
            for q in range(m):
                H[p, q] = out.partial([p, q])
    if not np.all(np.isfinite(H)):
        raise DomainError("non-finite Hessian entry")
    return 0.5 * (H + H.T)


# --------------------------------------------------------------------------
# Elementary functions accepting float, Dual or Jet
# --------------------------------------------------------------------------


def sqrt(x):
    if isinstance(x, (Dual, Jet)):
        return x._sqrt()
    if x < 0:
        raise DomainError(f"sqrt of {x!r}")
    return math.sqrt(x)


def exp(x):
    if isinstance(x, (Dual, Jet)):
        return x._exp()
    return math.exp(x)


def log(x):
    if isinstance(x, (Dual, Jet)):
        return x._log()
    if x <= 0:
        raise DomainError(f"log of {x!r}")
    return math.log(x)


def sin(x):
    if isinstance(x, (Dual, Jet)):
        return x._sin()
    return math.sin(x)


def cos(x):
    if isinstance(x, (Dual, Jet)):
        return x._cos()
    return math.cos(x)


# --------------------------------------------------------------------------
# Small dense linear algebra over any scalar type
# --------------------------------------------------------------------------


def solve_inverse(A: Sequence[Sequence]) -> list[list]:
    """Gauss-Jordan inverse with partial pivoting on the value slot."""
    n = len(A)
    M = [list(row) + [1.0 if i == j else 0.0 for j in range(n)] for i, row in enumerate(A)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(value_of(M[r][col])))
        if abs(value_of(M[piv][col])) < 1e-12:
            raise DomainError("singular matrix")
        M[col], M[piv] = M[piv], M[col]
        inv = 1.0 / M[col][col]
        M[col] = [e * inv for e in M[col]]
        for r in range(n):
            if r != col:
                factor = M[r][col]
                if isinstance(factor, (int, float)) and factor == 0:
                    continue
                M[r] = [e - factor * p for e, p in zip(M[r], M[col])]
    return [row[n:] for row in M]


def determinant(A: Sequence[Sequence]):
    """Determinant by elimination (no pivoting beyond a value-slot row swap)."""
    n = len(A)
    M = [list(row) for row in A]
    det = 1.0
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(value_of(M[r][col])))
        if abs(value_of(M[piv][col])) < 1e-12:
            raise DomainError("singular matrix")
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            det = -det
        det = det * M[col][col]
        inv = 1.0 / M[col][col]
        for r in range(col + 1, n):
            factor = M[r][col] * inv
            M[r] = [e - factor * p for e, p in zip(M[r], M[col])]
    return det
