"""Abelian group carriers, integer-matrix homomorphisms and finite sumsets.

Haar normalizations (fixed once per kind):

* ``finite``   product Z_{m_1} x ... x Z_{m_k}; counting measure.
* ``real``     R^n; Lebesgue measure.
* ``circle``   angles in [0, 2*pi); the uniform *probability* measure, so the
               entropy of an angle equals minus its divergence from uniform.
* ``positive`` (0, inf) under multiplication; dx/x, i.e. Lebesgue measure
               after the isomorphism x -> log x.
* ``complex``  C^x under multiplication; dz/|z|^2, i.e. Lebesgue measure
               d(log|z|) d(arg z) after z -> (log|z|, arg z).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, GroupMismatchError, ValidationError

TWO_PI = 2.0 * math.pi
CIRCLE_TOL = 1e-12
GROUP_SCHEMA_VERSION = 1

_KINDS = ("finite", "real", "circle", "positive", "complex")

HAAR_NORMALIZATION = {
    "finite": "counting measure",
    "real": "Lebesgue measure",
    "circle": "uniform probability measure on [0, 2pi)",
    "positive": "dx/x (Lebesgue after log)",
    "complex": "dz/|z|^2 (Lebesgue in (log|z|, arg z))",
}


@dataclass(frozen=True)
class GroupSpec:
    kind: str
    moduli: tuple[int, ...] = ()
    dim: int = 1

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValidationError(f"unknown group kind {self.kind!r}")
        if self.kind == "finite":
            if not self.moduli:
                raise ValidationError("finite group needs at least one modulus")
            if any(int(m) != m or m < 2 for m in self.moduli):
                raise ValidationError(f"moduli must be integers >= 2, got {self.moduli}")
            object.__setattr__(self, "moduli", tuple(int(m) for m in self.moduli))
        elif self.moduli:
            raise ValidationError(f"{self.kind} group takes no moduli")
        if self.kind == "real" and (int(self.dim) != self.dim or self.dim < 1):
            raise ValidationError(f"dimension must be >= 1, got {self.dim}")
        if self.kind == "complex":
            object.__setattr__(self, "dim", 2)
        elif self.kind != "real":
            object.__setattr__(self, "dim", 1)

    @classmethod
    def finite(cls, *moduli: int) -> "GroupSpec":
        if len(moduli) == 1 and isinstance(moduli[0], (tuple, list)):
            moduli = tuple(moduli[0])
        return cls("finite", tuple(moduli))

    @classmethod
    def cyclic(cls, m: int) -> "GroupSpec":
        return cls("finite", (m,))

    @classmethod
    def real(cls, dim: int = 1) -> "GroupSpec":
        return cls("real", (), dim)

    @classmethod
    def circle(cls) -> "GroupSpec":
        return cls("circle")

    @classmethod
    def positive(cls) -> "GroupSpec":
        return cls("positive")

    @classmethod
    def complex(cls) -> "GroupSpec":
        return cls("complex")

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    @property
    def haar_normalization(self) -> str:
        return HAAR_NORMALIZATION[self.kind]

    @property
    def order(self) -> int:
        self._require_finite()
        return math.prod(self.moduli)

    def power(self, n: int) -> "GroupSpec":
        """G^n as a finite product group."""
        self._require_finite()
        return GroupSpec("finite", self.moduli * n)

    def _require_finite(self):
        if self.kind != "finite":
            raise GroupMismatchError(f"operation needs a finite group, got {self.kind}")

    # -- element <-> flat index (finite kinds) ------------------------------
    def index(self, x) -> int:
        coords = self._coords(x)
        return int(np.ravel_multi_index(coords, self.moduli))

    def element(self, i: int):
        self._require_finite()
        if not 0 <= i < self.order:
            raise DomainError(f"index {i} outside group of order {self.order}")
        coords = tuple(int(c) for c in np.unravel_index(int(i), self.moduli))
        return coords[0] if len(coords) == 1 else coords

    def elements(self) -> list:
        return [self.element(i) for i in range(self.order)]

    @cached_property
    def digits(self) -> np.ndarray:
        """(order, k) array of coordinates of every flat index."""
        return np.stack(np.unravel_index(np.arange(self.order), self.moduli), axis=1)

    @cached_property
    def neg_index(self) -> np.ndarray:
        """Flat index of -x for every flat index x."""
        return self.combine_indices([(-1, np.arange(self.order))])

    def combine_indices(self, terms) -> np.ndarray:
        """Flat index of sum_j a_j x_j for (a_j, index-array) pairs (broadcasting)."""
        mods = np.asarray(self.moduli, dtype=np.int64)
        acc = None
        for a, idx in terms:
            idx = np.asarray(idx, dtype=np.int64)
            d = self.digits[idx] * int(a)
            acc = d if acc is None else acc + d
        acc %= mods
        flat = np.zeros(acc.shape[:-1], dtype=np.int64)
        for f, m in enumerate(self.moduli):
            flat = flat * m + acc[..., f]
        return flat

    def _coords(self, x) -> tuple[int, ...]:
        self._require_finite()
        coords = (x,) if np.isscalar(x) else tuple(x)
        if len(coords) != len(self.moduli):
            raise DomainError(f"element {x!r} has wrong arity for moduli {self.moduli}")
        out = []
        for c, m in zip(coords, self.moduli):
            if isinstance(c, (bool, np.bool_)) or int(c) != c or not 0 <= c < m:
                raise DomainError(f"element {x!r} outside Z_{self.moduli}")
            out.append(int(c))
        return tuple(out)

    # -- JSON -------------------------------------------------------------------
    def to_json(self) -> dict:
        d = {"schema": GROUP_SCHEMA_VERSION, "kind": self.kind}
        if self.kind == "finite":
            d["moduli"] = list(self.moduli)
        elif self.kind == "real":
            d["dim"] = self.dim
        return d

    @classmethod
    def from_json(cls, d: dict) -> "GroupSpec":
        if not isinstance(d, dict) or "kind" not in d:
            raise ValidationError(f"group spec must be an object with 'kind': {d!r}")
        if d.get("schema", GROUP_SCHEMA_VERSION) != GROUP_SCHEMA_VERSION:
            raise ValidationError(f"unsupported group schema {d.get('schema')}")
        kind = d["kind"]
        if kind == "finite":
            return cls("finite", tuple(d.get("moduli", ())))
        if kind == "real":
            return cls("real", (), int(d.get("dim", 1)))
        return cls(kind)


# -- elementwise arithmetic ----------------------------------------------------

def _check_circle(x) -> float:
    x = float(x)
    if not (-CIRCLE_TOL <= x < TWO_PI + CIRCLE_TOL) or math.isnan(x):
        raise DomainError(f"angle {x} outside [0, 2pi)")
    return x % TWO_PI if x >= 0 else 0.0


def _check_positive(x) -> float:
    x = float(x)
    if not x > 0 or math.isinf(x):
        raise DomainError(f"{x} is not a positive real")
    return x


def _check_complex(z) -> complex:
    z = complex(z)
    if z == 0 or not np.isfinite(z):
        raise DomainError(f"{z} is not a nonzero complex number")
    return z


def _check_real(g: GroupSpec, x) -> np.ndarray:
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.shape != (g.dim,) or not np.all(np.isfinite(v)):
        raise DomainError(f"{x!r} is not a point of R^{g.dim}")
    return v


def to_additive(g: GroupSpec, x):
    """Image of x under the log-isomorphism onto an additive carrier."""
    if g.kind == "positive":
        return math.log(_check_positive(x))
    if g.kind == "complex":
        z = _check_complex(x)
        return (math.log(abs(z)), math.atan2(z.imag, z.real) % TWO_PI)
    return x


def from_additive(g: GroupSpec, u):
    if g.kind == "positive":
        return math.exp(u)
    if g.kind == "complex":
        r, theta = u
        return complex(math.exp(r) * math.cos(theta), math.exp(r) * math.sin(theta))
    return u


def _wrap(theta: float) -> float:
    t = theta % TWO_PI
    return 0.0 if abs(t - TWO_PI) < CIRCLE_TOL else t


def add(g: GroupSpec, x, y):
    """Group operation x + y."""
    if g.kind == "finite":
        cx, cy = g._coords(x), g._coords(y)
        out = tuple((a + b) % m for a, b, m in zip(cx, cy, g.moduli))
        return out[0] if len(out) == 1 else out
    if g.kind == "real":
        return _check_real(g, x) + _check_real(g, y)
    if g.kind == "circle":
        return _wrap(_check_circle(x) + _check_circle(y))
    if g.kind == "positive":
        return from_additive(g, to_additive(g, x) + to_additive(g, y))
    ux, uy = to_additive(g, x), to_additive(g, y)
    return from_additive(g, (ux[0] + uy[0], _wrap(ux[1] + uy[1])))


def negate(g: GroupSpec, x):
    return scalar_mul(g, -1, x)


def identity(g: GroupSpec):
    if g.kind == "finite":
        return 0 if len(g.moduli) == 1 else (0,) * len(g.moduli)
    if g.kind == "real":
        return np.zeros(g.dim)
    if g.kind == "circle":
        return 0.0
    if g.kind == "positive":
        return 1.0
    return complex(1.0, 0.0)


def scalar_mul(g: GroupSpec, a: int, x):
    """a-fold sum of x; negative a means repeated inverse."""
    if int(a) != a:
        raise DomainError(f"scalar must be an integer, got {a!r}")
    a = int(a)
    if g.kind == "finite":
        out = tuple((a * c) % m for c, m in zip(g._coords(x), g.moduli))
        return out[0] if len(out) == 1 else out
    if g.kind == "real":
        return a * _check_real(g, x)
    if g.kind == "circle":
        return _wrap(a * _check_circle(x))
    if g.kind == "positive":
        return from_additive(g, a * to_additive(g, x))
    r, theta = to_additive(g, x)
    return from_additive(g, (a * r, _wrap(a * theta)))


def circle_equal(x: float, y: float, tol: float = CIRCLE_TOL) -> bool:
    d = abs(float(x) - float(y)) % TWO_PI
    return min(d, TWO_PI - d) <= tol


def elements_equal(g: GroupSpec, x, y, tol: float = CIRCLE_TOL) -> bool:
    if g.kind == "finite":
        return g._coords(x) == g._coords(y)
    if g.kind == "circle":
        return circle_equal(x, y, tol)
    if g.kind == "real":
        return bool(np.allclose(x, y, atol=tol, rtol=0))
    return abs(complex(x) - complex(y)) <= tol * max(1.0, abs(complex(x)))


# -- integer matrices ----------------------------------------------------------

@dataclass(frozen=True)
class IntegerMatrix:
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.entries)
        if not rows or not rows[0]:
            raise ValidationError("matrix must have at least one row and column")
        ncol = len(rows[0])
        for r in rows:
            if len(r) != ncol:
                raise ValidationError("ragged matrix")
            for v in r:
                if isinstance(v, (bool, np.bool_)) or int(v) != v:
                    raise ValidationError(f"non-integer entry {v!r}")
        object.__setattr__(self, "entries", tuple(tuple(int(v) for v in r) for r in rows))

    @classmethod
    def identity(cls, n: int) -> "IntegerMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0])

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64)

    def det(self) -> int:
        """Exact determinant (Bareiss fraction-free elimination)."""
        if not self.is_square:
            raise ValidationError("determinant of a non-square matrix")
        a = [list(r) for r in self.entries]
        n = self.rows
        sign, prev = 1, 1
        for k in range(n - 1):
            if a[k][k] == 0:
                for r in range(k + 1, n):
                    if a[r][k] != 0:
                        a[k], a[r] = a[r], a[k]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            prev = a[k][k]
        return sign * a[n - 1][n - 1]

    def inverse(self) -> "IntegerMatrix":
        """Exact inverse; only defined for unimodular matrices."""
        if not is_unimodular(self):
            raise ValidationError("only unimodular integer matrices have integer inverses")
        n = self.rows
        aug = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)]
               for i, row in enumerate(self.entries)]
        for c in range(n):
            piv = next(r for r in range(c, n) if aug[r][c] != 0)
            aug[c], aug[piv] = aug[piv], aug[c]
            pv = aug[c][c]
            aug[c] = [v / pv for v in aug[c]]
            for r in range(n):
                if r != c and aug[r][c] != 0:
                    f = aug[r][c]
                    aug[r] = [a - f * b for a, b in zip(aug[r], aug[c])]
        inv = tuple(tuple(int(v) for v in row[n:]) for row in aug)
        return IntegerMatrix(inv)

    def __matmul__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        prod = self.as_array() @ other.as_array()
        return IntegerMatrix(tuple(map(tuple, prod.tolist())))


def is_unimodular(A: IntegerMatrix) -> bool:
    return A.is_square and A.det() in (1, -1)


def apply_integer_matrix(A: IntegerMatrix, x: Sequence, g: GroupSpec) -> tuple:
    """Component i of the result is sum_j a_ij x_j computed in g."""
    if not A.is_square:
        raise ValidationError("apply_integer_matrix expects a square matrix")
    if len(x) != A.cols:
        raise ValidationError(f"matrix is {A.rows}x{A.cols} but got {len(x)} components")
    out = []
    for row in A.entries:
        acc = identity(g)
        for a, xj in zip(row, x):
            acc = add(g, acc, scalar_mul(g, a, xj))
        out.append(acc)
    return tuple(out)


def random_unimodular(n: int, rng: np.random.Generator, steps: int = 6,
                      max_entry: int = 3) -> IntegerMatrix:
    """Random element of GL_n(Z) as a product of elementary matrices."""
    a = np.eye(n, dtype=np.int64)
    for _ in range(steps):
        i, j = rng.choice(n, size=2, replace=False) if n > 1 else (0, 0)
        e = np.eye(n, dtype=np.int64)
        if n > 1:
            e[i, j] = int(rng.integers(-max_entry, max_entry + 1))
        a = e @ a
    if rng.random() < 0.5:
        a[0] = -a[0]
    if n > 1 and rng.random() < 0.5:
        perm = rng.permutation(n)
        a = a[perm]
    return IntegerMatrix(tuple(map(tuple, a.tolist())))


# -- finite sumsets ---------------------------------------------------------------

def _validated_set(A: Iterable, g: GroupSpec, label: str) -> list:
    g._require_finite()
    items = list(A)
    if not items:
        raise ValidationError(f"set {label} is empty")
    return [g.element(g.index(a)) for a in items]


def sumset(A: Iterable, B: Iterable, g: GroupSpec) -> frozenset:
    A, B = _validated_set(A, g, "A"), _validated_set(B, g, "B")
    return frozenset(add(g, a, b) for a, b in itertools.product(A, B))


def difference_set(A: Iterable, B: Iterable, g: GroupSpec) -> frozenset:
    A, B = _validated_set(A, g, "A"), _validated_set(B, g, "B")
    return frozenset(add(g, a, negate(g, b)) for a, b in itertools.product(A, B))


def restricted_sumset(A: Iterable, B: Iterable, E: Iterable, g: GroupSpec) -> frozenset:
    """{a + b : (a, b) in E}; E must be a subset of A x B."""
    A, B = _validated_set(A, g, "A"), _validated_set(B, g, "B")
    Aset, Bset = set(A), set(B)
    out = set()
    for a, b in E:
        a, b = g.element(g.index(a)), g.element(g.index(b))
        if a not in Aset or b not in Bset:
            raise ValidationError(f"pair {(a, b)!r} not in A x B")
        out.add(add(g, a, b))
    return frozenset(out)
