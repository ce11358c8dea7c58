"""Sparse multivariate polynomials and graded monomial bases.

Exponents are plain tuples of non-negative ints whose length equals the
ambient dimension (the x block, the y block, or both stacked as (x, y)).
All values are immutable after construction; every operation returns a
new object, so concurrent use needs no coordination.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

Exponent = tuple[int, ...]

# Underflow guard only: coefficients this small are indistinguishable from
# zero in any downstream floating computation. Not a pruning threshold.
COEFF_ZERO_EPS = 1e-300


class DimensionMismatchError(ValueError):
    """Operands or evaluation points with incompatible dimensions."""


def total_degree(exponent: Exponent) -> int:
    return sum(exponent)


def _compositions(total: int, parts: int) -> Iterator[Exponent]:
    # First variable descending yields graded-lex order within each degree.
    if parts == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


def graded_exponents(dim: int, degree: int) -> Iterator[Exponent]:
    """All exponents of total degree <= degree, graded-lex order."""
    for total in range(degree + 1):
        yield from _compositions(total, dim)


class MonomialBasis:
    """Ordered monomial basis of all exponents with total degree <= degree.

    The order is graded lexicographic (degree first, then lex with the
    first variable dominant); it is total and deterministic, and the
    degree-k basis is a prefix of every degree-(k+j) basis.
    """

    __slots__ = ("dim", "degree", "exponents", "_index")

    def __init__(self, dim: int, degree: int):
        if dim < 1:
            raise ValueError(f"basis dimension must be >= 1, got {dim}")
        if degree < 0:
            raise ValueError(f"basis degree must be >= 0, got {degree}")
        self.dim = dim
        self.degree = degree
        self.exponents: tuple[Exponent, ...] = tuple(graded_exponents(dim, degree))
        self._index: dict[Exponent, int] = {e: i for i, e in enumerate(self.exponents)}

    def __len__(self) -> int:
        return len(self.exponents)

    def __iter__(self) -> Iterator[Exponent]:
        return iter(self.exponents)

    def __getitem__(self, i: int) -> Exponent:
        return self.exponents[i]

    def index(self, exponent: Exponent) -> int:
        try:
            return self._index[exponent]
        except KeyError:
            raise KeyError(
                f"exponent {exponent} not in basis (dim={self.dim}, degree={self.degree})"
            ) from None

    def __contains__(self, exponent: Exponent) -> bool:
        return exponent in self._index

    def __repr__(self) -> str:
        return f"MonomialBasis(dim={self.dim}, degree={self.degree}, size={len(self)})"


@lru_cache(maxsize=None)
def monomial_basis(dim: int, degree: int) -> MonomialBasis:
    """Basis of all monomials of total degree <= degree in `dim` variables.

    Size is binomial(dim + degree, dim).
    """
    return MonomialBasis(dim, degree)


def basis_size(dim: int, degree: int) -> int:
    return math.comb(dim + degree, dim)


class Polynomial:
    """Real polynomial stored as a sparse map exponent -> coefficient.

    Zero coefficients are dropped on construction, so two equal
    polynomials always carry identical term maps.
    """

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: Mapping[Exponent, float] | None = None):
        if dim < 1:
            raise ValueError(f"polynomial dimension must be >= 1, got {dim}")
        clean: dict[Exponent, float] = {}
        for exponent, coeff in (terms or {}).items():
            exponent = tuple(int(k) for k in exponent)
            if len(exponent) != dim:
                raise DimensionMismatchError(
                    f"exponent {exponent} has length {len(exponent)}, expected {dim}"
                )
            if any(k < 0 for k in exponent):
                raise ValueError(f"negative power in exponent {exponent}")
            c = float(coeff)
            if abs(c) > COEFF_ZERO_EPS:
                clean[exponent] = clean.get(exponent, 0.0) + c
        # A second pass: cancellation inside the input mapping.
        self.terms: dict[Exponent, float] = {
            e: c for e, c in clean.items() if abs(c) > COEFF_ZERO_EPS
        }
        self.dim = dim

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero(dim: int) -> "Polynomial":
        return Polynomial(dim)

    @staticmethod
    def constant(dim: int, value: float) -> "Polynomial":
        return Polynomial(dim, {(0,) * dim: value})

    @staticmethod
    def variable(dim: int, index: int) -> "Polynomial":
        if not 0 <= index < dim:
            raise ValueError(f"variable index {index} out of range for dim {dim}")
        exponent = tuple(1 if i == index else 0 for i in range(dim))
        return Polynomial(dim, {exponent: 1.0})

    @staticmethod
    def monomial(dim: int, exponent: Exponent, coeff: float = 1.0) -> "Polynomial":
        return Polynomial(dim, {tuple(exponent): coeff})

    # -- structure ----------------------------------------------------

    @property
    def degree(self) -> int:
        """Total degree; the zero polynomial has degree 0."""
        if not self.terms:
            return 0
        return max(total_degree(e) for e in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def key(self) -> tuple:
        """Canonical hashable form, used for caching and equality."""
        return (self.dim, tuple(sorted(self.terms.items())))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.dim == other.dim and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(self.key())

    # -- arithmetic ---------------------------------------------------

    def _check_same_dim(self, other: "Polynomial") -> None:
        if self.dim != other.dim:
            raise DimensionMismatchError(
                f"operands have dimensions {self.dim} and {other.dim}"
            )

    def __add__(self, other: "Polynomial | float | int") -> "Polynomial":
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.dim, other)
        self._check_same_dim(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0.0) + c
        return Polynomial(self.dim, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.dim, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "Polynomial | float | int") -> "Polynomial":
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.dim, other)
        return self + (-other)

    def __rsub__(self, other: float | int) -> "Polynomial":
        return Polynomial.constant(self.dim, other) - self

    def __mul__(self, other: "Polynomial | float | int") -> "Polynomial":
        if isinstance(other, (int, float)):
            return self.scale(other)
        self._check_same_dim(other)
        out: dict[Exponent, float] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0.0) + c1 * c2
        return Polynomial(self.dim, out)

    __rmul__ = __mul__

    def scale(self, factor: float) -> "Polynomial":
        return Polynomial(self.dim, {e: c * factor for e, c in self.terms.items()})

    def __pow__(self, power: int) -> "Polynomial":
        if power < 0:
            raise ValueError("negative powers are not polynomials")
        out = Polynomial.constant(self.dim, 1.0)
        for _ in range(power):
            out = out * self
        return out

    # -- evaluation and substitution -----------------------------------

    def __call__(self, point: Iterable[float]) -> float:
        return self.evaluate(point)

    def evaluate(self, point: Iterable[float]) -> float:
        """Evaluate at a point of matching dimension."""
        pt = tuple(float(v) for v in point)
        if len(pt) != self.dim:
            raise DimensionMismatchError(
                f"point has length {len(pt)}, expected {self.dim}"
            )
        acc = 0.0
        for exponent, coeff in self.terms.items():
            term = coeff
            for v, k in zip(pt, exponent):
                if k:
                    term *= v**k
            acc += term
        return acc

    def substitute_prefix(self, values: Iterable[float]) -> "Polynomial":
        """Fix the leading block of variables to numbers.

        A polynomial over (x, y) with len(values) == n becomes a
        polynomial in y alone. Degrees in the remaining variables never
        increase.
        """
        vals = tuple(float(v) for v in values)
        n = len(vals)
        if not 0 < n < self.dim:
            raise DimensionMismatchError(
                f"cannot fix {n} leading variables of a {self.dim}-variable polynomial"
            )
        out: dict[Exponent, float] = {}
        for exponent, coeff in self.terms.items():
            factor = coeff
            for v, k in zip(vals, exponent[:n]):
                if k:
                    factor *= v**k
            rest = exponent[n:]
            out[rest] = out.get(rest, 0.0) + factor
        return Polynomial(self.dim - n, out)

    def extend(self, new_dim: int, offset: int = 0) -> "Polynomial":
        """Reinterpret in a larger ambient space.

        Existing variables map to indices offset..offset+dim-1; new
        variables do not occur in any term.
        """
        if new_dim < self.dim + offset:
            raise DimensionMismatchError(
                f"cannot embed dim {self.dim} at offset {offset} into dim {new_dim}"
            )
        pad_right = new_dim - offset - self.dim
        out = {
            (0,) * offset + e + (0,) * pad_right: c for e, c in self.terms.items()
        }
        return Polynomial(new_dim, out)

    def substitute_affine_block(
        self, shift: Iterable[float], scale: Iterable[float]
    ) -> "Polynomial":
        """Apply x_i -> shift_i + scale_i * u_i to the leading block.

        Variables beyond the shift/scale vectors are left untouched, so a
        joint (x, y) polynomial is rescaled in x only.
        """
        sh = tuple(float(v) for v in shift)
        sc = tuple(float(v) for v in scale)
        if len(sh) != len(sc):
            raise DimensionMismatchError("shift and scale lengths differ")
        n = len(sh)
        if n > self.dim:
            raise DimensionMismatchError(
                f"affine block of length {n} exceeds dimension {self.dim}"
            )
        result = Polynomial.zero(self.dim)
        for exponent, coeff in self.terms.items():
            term = Polynomial.monomial(self.dim, (0,) * n + exponent[n:], coeff)
            for i in range(n):
                k = exponent[i]
                if k == 0:
                    continue
                expansion: dict[Exponent, float] = {}
                for j in range(k + 1):
                    e = tuple(j if t == i else 0 for t in range(self.dim))
                    expansion[e] = math.comb(k, j) * sh[i] ** (k - j) * sc[i] ** j
                term = term * Polynomial(self.dim, expansion)
            result = result + term
        return result

    # -- rendering ------------------------------------------------------

    def __repr__(self) -> str:
        return f"Polynomial(dim={self.dim}, {self.to_string()})"

    def to_string(self, names: tuple[str, ...] | None = None) -> str:
        if not self.terms:
            return "0"
        if names is None:
            names = tuple(f"x{i + 1}" for i in range(self.dim))
        parts = []
        for exponent in sorted(self.terms, key=lambda e: (total_degree(e), e)):
            coeff = self.terms[exponent]
            factors = [
                f"{names[i]}^{k}" if k > 1 else names[i]
                for i, k in enumerate(exponent)
                if k
            ]
            body = "*".join(factors)
            if body:
                parts.append(f"{coeff:g}*{body}")
            else:
                parts.append(f"{coeff:g}")
        return " + ".join(parts)


def substitute_x(poly: Polynomial, x0: Iterable[float]) -> Polynomial:
    """Polynomial in y obtained from a joint (x, y) polynomial at x = x0."""
    return poly.substitute_prefix(x0)
