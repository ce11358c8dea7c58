"""Moment sequences, the associated linear functional, and moment matrices.

A moment sequence z assigns a value to every exponent of total degree up
to its bound. The linear functional L_z maps a polynomial sum f_a x^a to
sum f_a z_a. Moment and localizing matrices are dense symmetric arrays
indexed by the graded monomial basis; dense storage is deliberate, the
matrices here stay at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

from .polynomials import (
    Exponent,
    MonomialBasis,
    Polynomial,
    graded_exponents,
    monomial_basis,
    total_degree,
)


class DegreeOverflowError(ValueError):
    """A required moment lies beyond the sequence's degree bound."""


class MomentSequence:
    """Values z_a for every exponent a with |a| <= degree."""

    __slots__ = ("dim", "degree", "values")

    def __init__(self, dim: int, degree: int, values: Mapping[Exponent, float]):
        self.dim = dim
        self.degree = degree
        complete: dict[Exponent, float] = {}
        for e in graded_exponents(dim, degree):
            if e not in values:
                raise ValueError(f"moment sequence missing index {e}")
            complete[e] = float(values[e])
        self.values = complete

    def __getitem__(self, exponent: Exponent) -> float:
        try:
            return self.values[tuple(exponent)]
        except KeyError:
            raise DegreeOverflowError(
                f"moment index {tuple(exponent)} exceeds degree bound {self.degree}"
            ) from None

    def __len__(self) -> int:
        return len(self.values)

    @property
    def mass(self) -> float:
        return self.values[(0,) * self.dim]

    @staticmethod
    def dirac(point: Iterable[float], degree: int) -> "MomentSequence":
        """Moments of the unit point mass at the given point."""
        pt = tuple(float(v) for v in point)
        dim = len(pt)
        vals: dict[Exponent, float] = {}
        for e in graded_exponents(dim, degree):
            m = 1.0
            for v, k in zip(pt, e):
                if k:
                    m *= v**k
            vals[e] = m
        return MomentSequence(dim, degree, vals)

    def __repr__(self) -> str:
        return f"MomentSequence(dim={self.dim}, degree={self.degree})"


def riesz(z: MomentSequence, poly: Polynomial) -> float:
    """Apply the linear functional of z to a polynomial."""
    if poly.dim != z.dim:
        raise ValueError(f"polynomial dim {poly.dim} != sequence dim {z.dim}")
    return sum(c * z[e] for e, c in poly.terms.items())


def moment_matrix(z: MomentSequence, order: int) -> np.ndarray:
    """Symmetric matrix with entry (a, b) = z_{a+b}, basis order of degree `order`."""
    if 2 * order > z.degree:
        raise DegreeOverflowError(
            f"moment matrix of order {order} needs moments up to {2 * order}, "
            f"sequence is bounded by {z.degree}"
        )
    basis = monomial_basis(z.dim, order)
    size = len(basis)
    mat = np.empty((size, size))
    for i in range(size):
        for j in range(i, size):
            v = z[tuple(a + b for a, b in zip(basis[i], basis[j]))]
            mat[i, j] = v
            mat[j, i] = v
    return mat


@dataclass(frozen=True)
class LocalizerStructure:
    """Symbolic entry lists for a localizing matrix.

    Entry (i, j) of the matrix is sum_g coeff * z_exponent over the
    stored (coeff, exponent) pairs; with generator 1 this degenerates to
    the plain moment-matrix structure. Instances are cached per
    (generator, dim, order) so repeated assembly at higher orders reuses
    the entry lists.
    """

    generator: Polynomial
    dim: int
    order: int
    basis: MonomialBasis
    entries: tuple[tuple[tuple[float, Exponent], ...], ...]  # row-major upper triangle

    def entry(self, i: int, j: int) -> tuple[tuple[float, Exponent], ...]:
        if i > j:
            i, j = j, i
        return self.entries[self._flat(i, j)]

    def _flat(self, i: int, j: int) -> int:
        # Upper-triangle offset for row i, column j >= i.
        size = len(self.basis)
        return i * size - i * (i - 1) // 2 + (j - i)

    @property
    def max_moment_degree(self) -> int:
        return 2 * self.order + self.generator.degree

    def apply(self, z: MomentSequence) -> np.ndarray:
        """Materialize the matrix for a concrete moment sequence."""
        size = len(self.basis)
        mat = np.empty((size, size))
        for i in range(size):
            for j in range(i, size):
                acc = 0.0
                for coeff, exponent in self.entry(i, j):
                    acc += coeff * z[exponent]
                mat[i, j] = acc
                mat[j, i] = acc
        return mat


@lru_cache(maxsize=None)
def _localizer_structure_cached(
    generator_key: tuple, dim: int, order: int
) -> LocalizerStructure:
    _, term_items = generator_key
    generator = Polynomial(dim, dict(term_items))
    basis = monomial_basis(dim, order)
    gen_terms = sorted(generator.terms.items())  # canonical accumulation order
    rows: list[tuple[tuple[float, Exponent], ...]] = []
    for i in range(len(basis)):
        for j in range(i, len(basis)):
            ab = tuple(a + b for a, b in zip(basis[i], basis[j]))
            rows.append(
                tuple(
                    (coeff, tuple(a + g for a, g in zip(ab, gamma)))
                    for gamma, coeff in gen_terms
                )
            )
    return LocalizerStructure(generator, dim, order, basis, tuple(rows))


def localizer_structure(generator: Polynomial, dim: int, order: int) -> LocalizerStructure:
    """Entry lists of the localizing matrix for a generator polynomial."""
    if generator.dim != dim:
        raise ValueError(f"generator dim {generator.dim} != requested dim {dim}")
    return _localizer_structure_cached(generator.key(), dim, order)


def localizing_matrix(z: MomentSequence, generator: Polynomial, order: int) -> np.ndarray:
    """Symmetric matrix with entry (a, b) = sum_g g_c * z_{a+b+c}."""
    if generator.dim != z.dim:
        raise ValueError(f"generator dim {generator.dim} != sequence dim {z.dim}")
    if 2 * order + generator.degree > z.degree:
        raise DegreeOverflowError(
            f"localizing matrix of order {order} with generator degree "
            f"{generator.degree} needs moments up to {2 * order + generator.degree}, "
            f"sequence is bounded by {z.degree}"
        )
    basis = monomial_basis(z.dim, order)
    size = len(basis)
    gen_terms = sorted(generator.terms.items())  # same order as the structure path
    mat = np.empty((size, size))
    for i in range(size):
        for j in range(i, size):
            ab = tuple(a + b for a, b in zip(basis[i], basis[j]))
            acc = 0.0
            for gamma, coeff in gen_terms:
                acc += coeff * z[tuple(a + g for a, g in zip(ab, gamma))]
            mat[i, j] = acc
            mat[j, i] = acc
    return mat


def numerical_rank(matrix: np.ndarray, tol: float = 1e-6) -> int:
    """Number of singular values above tol times the largest one."""
    if matrix.size == 0:
        return 0
    sv = np.linalg.svd(matrix, compute_uv=False)
    if sv[0] <= 0.0:
        return 0
    return int(np.count_nonzero(sv > tol * sv[0]))
