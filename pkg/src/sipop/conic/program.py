"""Standard-form semidefinite programs over products of dense PSD blocks.

The model is

    minimize   <C, X>
    subject to <A_i, X> = b_i,   i = 1..m
               X = diag(X_1, ..., X_K) with each X_k PSD,

where <., .> is the trace inner product. Coefficient matrices are stored
sparsely as upper-triangle entries: an entry (block, row, col, value)
with row < col stands for the symmetric pair, so it contributes
2 * value * X[row, col] to the functional. This matches the SDPA sparse
file convention exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class MatrixEntry(NamedTuple):
    block: int
    row: int
    col: int
    value: float


def canonical_entries(entries: Iterable[MatrixEntry]) -> tuple[MatrixEntry, ...]:
    """Merge duplicate coordinates, drop zeros, sort by (block, row, col)."""
    acc: dict[tuple[int, int, int], float] = {}
    for e in entries:
        r, c = (e.row, e.col) if e.row <= e.col else (e.col, e.row)
        key = (e.block, r, c)
        acc[key] = acc.get(key, 0.0) + float(e.value)
    return tuple(
        MatrixEntry(b, r, c, v) for (b, r, c), v in sorted(acc.items()) if v != 0.0
    )


@dataclass
class ConicProgram:
    """Immutable-by-convention SDP instance; shareable across solves."""

    block_sizes: list[int]
    objective: tuple[MatrixEntry, ...]
    equalities: list[tuple[tuple[MatrixEntry, ...], float]]
    name: str = ""
    provenance: str = ""

    def __post_init__(self) -> None:
        if not self.block_sizes:
            raise ValueError("program needs at least one PSD block")
        if any(s < 1 for s in self.block_sizes):
            raise ValueError(f"block sizes must be >= 1, got {self.block_sizes}")
        self.objective = canonical_entries(self.objective)
        self.equalities = [
            (canonical_entries(fn), float(rhs)) for fn, rhs in self.equalities
        ]
        for entry in self.objective:
            self._check_entry(entry, "objective")
        for i, (fn, _) in enumerate(self.equalities):
            for entry in fn:
                self._check_entry(entry, f"equality {i}")

    def _check_entry(self, entry: MatrixEntry, where: str) -> None:
        if not 0 <= entry.block < len(self.block_sizes):
            raise ValueError(f"{where}: block {entry.block} out of range")
        size = self.block_sizes[entry.block]
        if not (0 <= entry.row <= entry.col < size):
            raise ValueError(
                f"{where}: entry ({entry.row}, {entry.col}) outside block of size {size}"
            )

    @property
    def n_equalities(self) -> int:
        return len(self.equalities)

    def rhs(self) -> np.ndarray:
        return np.array([b for _, b in self.equalities])

    def dense(self, entries: Sequence[MatrixEntry]) -> list[np.ndarray]:
        """Full symmetric matrices, one per block, for an entry list."""
        mats = [np.zeros((s, s)) for s in self.block_sizes]
        for blk, r, c, v in entries:
            mats[blk][r, c] += v
            if r != c:
                mats[blk][c, r] += v
        return mats

    def dense_objective(self) -> list[np.ndarray]:
        return self.dense(self.objective)

    def dense_equality(self, i: int) -> list[np.ndarray]:
        return self.dense(self.equalities[i][0])

    def pairing(self, entries: Sequence[MatrixEntry], blocks: Sequence[np.ndarray]) -> float:
        """Trace inner product of an entry list with symmetric blocks."""
        acc = 0.0
        for blk, r, c, v in entries:
            acc += v * blocks[blk][r, c] * (1.0 if r == c else 2.0)
        return acc

    def structurally_equal(self, other: "ConicProgram") -> bool:
        return (
            self.block_sizes == other.block_sizes
            and self.objective == other.objective
            and len(self.equalities) == len(other.equalities)
            and all(
                a[0] == b[0] and a[1] == b[1]
                for a, b in zip(self.equalities, other.equalities)
            )
        )


@dataclass
class SolveSettings:
    """Interior-point tolerances and limits."""

    feasibility_tol: float = 1e-8
    gap_tol: float = 1e-8
    max_iterations: int = 200
    step_fraction: float = 0.98
    # Divergence thresholds for infeasibility / unboundedness heuristics.
    divergence_scale: float = 1e7
    ray_residual_tol: float = 1e-9


# Solver outcome labels. "optimal" is only ever reported after the
# returned triple passes the independent verifier below.
STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"
STATUS_MAX_ITERATIONS = "max-iterations"
STATUS_NUMERICAL_FAILURE = "numerical-failure"


@dataclass
class ConicSolution:
    status: str
    X: list[np.ndarray]
    y: np.ndarray
    S: list[np.ndarray]
    primal_objective: float
    dual_objective: float
    iterations: int
    message: str = ""

    @property
    def gap(self) -> float:
        return self.primal_objective - self.dual_objective


@dataclass
class VerificationReport:
    """Post-solve check computed from the returned solution alone."""

    ok: bool
    primal_residual: float
    dual_residual: float
    relative_gap: float
    min_eig_X: float
    min_eig_S: float
    details: dict = field(default_factory=dict)


def _min_eig(blocks: Sequence[np.ndarray]) -> float:
    worst = np.inf
    for B in blocks:
        w = np.linalg.eigvalsh(0.5 * (B + B.T))
        worst = min(worst, float(w[0]))
    return worst


def verify_solution(
    program: ConicProgram,
    solution: ConicSolution,
    feasibility_tol: float = 1e-8,
    gap_tol: float = 1e-8,
) -> VerificationReport:
    """Recompute feasibility floors, equality residuals and the gap.

    Residuals and the gap are measured relative to the problem scale
    (1 + norms of the data / objectives), which is also the termination
    measure used by the solver.
    """
    b = program.rhs()
    resid = np.array(
        [program.pairing(fn, solution.X) - rhs for fn, rhs in program.equalities]
    )
    b_scale = 1.0 + (float(np.max(np.abs(b))) if b.size else 0.0)
    primal_residual = float(np.linalg.norm(resid)) / b_scale

    C = program.dense_objective()
    dual_mats = [np.zeros_like(Ck) for Ck in C]
    for i, (fn, _) in enumerate(program.equalities):
        for Ak_blk, Ak in zip_blocks(program, fn):
            dual_mats[Ak_blk] += solution.y[i] * Ak
    c_norm = np.sqrt(sum(float(np.sum(Ck * Ck)) for Ck in C))
    dual_err = 0.0
    for k, Ck in enumerate(C):
        R = Ck - solution.S[k] - dual_mats[k]
        dual_err += float(np.sum(R * R))
    dual_residual = np.sqrt(dual_err) / (1.0 + c_norm)

    p, d = solution.primal_objective, solution.dual_objective
    relative_gap = abs(p - d) / (1.0 + abs(p) + abs(d))
    min_eig_X = _min_eig(solution.X)
    min_eig_S = _min_eig(solution.S)
    ok = (
        primal_residual <= feasibility_tol
        and dual_residual <= feasibility_tol
        and relative_gap <= gap_tol
        and min_eig_X >= -feasibility_tol
        and min_eig_S >= -feasibility_tol
    )
    return VerificationReport(
        ok=ok,
        primal_residual=primal_residual,
        dual_residual=dual_residual,
        relative_gap=relative_gap,
        min_eig_X=min_eig_X,
        min_eig_S=min_eig_S,
        details={"primal_objective": p, "dual_objective": d},
    )


def zip_blocks(
    program: ConicProgram, entries: Sequence[MatrixEntry]
) -> list[tuple[int, np.ndarray]]:
    """Dense symmetric matrices per block actually touched by the entries."""
    touched: dict[int, np.ndarray] = {}
    for blk, r, c, v in entries:
        if blk not in touched:
            s = program.block_sizes[blk]
            touched[blk] = np.zeros((s, s))
        touched[blk][r, c] += v
        if r != c:
            touched[blk][c, r] += v
    return sorted(touched.items())
