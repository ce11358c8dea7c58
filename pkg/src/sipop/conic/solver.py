"""Primal-dual path-following interior point method for dense SDP blocks.

The search direction is the HKM direction (linearize X S = sigma*mu*I in
the X-order and symmetrize dX afterwards) with a Mehrotra-style
predictor-corrector step. The Schur complement

    B[i, j] = tr(A_i X A_j S^{-1})

is symmetric positive definite for linearly independent constraints and
is factored by Cholesky each iteration. Everything is dense; the solver
targets blocks up to a few hundred rows.

Infeasibility and unboundedness are reported through divergence
heuristics: a normalized Farkas ray on the dual side certifies primal
infeasibility, its mirror image on the primal side certifies
unboundedness. The solver never labels a result "optimal" without the
independent post-solve verifier agreeing.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .program import (
    STATUS_INFEASIBLE,
    STATUS_MAX_ITERATIONS,
    STATUS_NUMERICAL_FAILURE,
    STATUS_OPTIMAL,
    STATUS_UNBOUNDED,
    ConicProgram,
    ConicSolution,
    SolveSettings,
    verify_solution,
)

_MIN_SIGMA = 1e-10
_STALL_STEP = 1e-10


def _sym(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def _chol(M: np.ndarray) -> np.ndarray | None:
    """Lower Cholesky factor, or None when not numerically PD."""
    try:
        return sla.cholesky(M, lower=True, check_finite=False)
    except sla.LinAlgError:
        return None


def _max_step(M_chol: np.ndarray, dM: np.ndarray) -> float:
    """sup { a >= 0 : M + a * dM PSD } given the Cholesky factor of M."""
    W = sla.solve_triangular(M_chol, dM, lower=True, check_finite=False)
    W = sla.solve_triangular(M_chol, W.T, lower=True, check_finite=False)
    lam = float(np.linalg.eigvalsh(_sym(W))[0])
    if lam >= 0.0:
        return np.inf
    return -1.0 / lam


class _Workspace:
    """Private per-solve state; a program itself is never mutated."""

    def __init__(self, program: ConicProgram):
        self.program = program
        self.sizes = program.block_sizes
        self.nblocks = len(self.sizes)
        self.total_dim = sum(self.sizes)
        self.m = program.n_equalities
        self.b = program.rhs()
        self.C = program.dense_objective()
        # Dense constraint matrices, kept per touched block only.
        self.A: list[dict[int, np.ndarray]] = []
        for i in range(self.m):
            mats = program.dense_equality(i)
            self.A.append(
                {k: mats[k] for k in range(self.nblocks) if np.any(mats[k])}
            )
        self.a_norms = np.array(
            [
                np.sqrt(sum(float(np.sum(Ak * Ak)) for Ak in Ai.values()))
                for Ai in self.A
            ]
        )
        self.c_norm = np.sqrt(sum(float(np.sum(Ck * Ck)) for Ck in self.C))
        self.b_scale = 1.0 + (float(np.max(np.abs(self.b))) if self.m else 0.0)
        self.c_scale = 1.0 + self.c_norm

    # -- linear maps ----------------------------------------------------

    def apply_A(self, X: list[np.ndarray]) -> np.ndarray:
        out = np.empty(self.m)
        for i, Ai in enumerate(self.A):
            out[i] = sum(float(np.sum(Ak * X[k])) for k, Ak in Ai.items())
        return out

    def apply_At(self, y: np.ndarray) -> list[np.ndarray]:
        out = [np.zeros((s, s)) for s in self.sizes]
        for i, Ai in enumerate(self.A):
            yi = y[i]
            if yi != 0.0:
                for k, Ak in Ai.items():
                    out[k] += yi * Ak
        return out

    def inner(self, P: list[np.ndarray], Q: list[np.ndarray]) -> float:
        return sum(float(np.sum(Pk * Qk)) for Pk, Qk in zip(P, Q))


def solve(program: ConicProgram, settings: SolveSettings | None = None) -> ConicSolution:
    """Solve a conic program, returning primal and dual solutions.

    The dual vector follows the order of the program's equalities. The
    status is "optimal" only when the independent verifier confirms the
    returned triple within the settings' tolerances.
    """
    settings = settings or SolveSettings()
    ws = _Workspace(program)
    tau = settings.step_fraction

    # Scaled-identity start, sized to the data so the first iterates do
    # not collide with the cone boundary.
    xi = 10.0
    if ws.m:
        xi = max(xi, float(np.max((1.0 + np.abs(ws.b)) / (1.0 + ws.a_norms))))
    eta = max(10.0, ws.c_norm)
    X = [xi * np.eye(s) for s in ws.sizes]
    S = [eta * np.eye(s) for s in ws.sizes]
    y = np.zeros(ws.m)

    best: ConicSolution | None = None
    best_score = np.inf
    stalls = 0

    status = STATUS_MAX_ITERATIONS
    message = "iteration cap reached"
    iterations = 0

    for iteration in range(settings.max_iterations):
        iterations = iteration
        pobj = ws.inner(ws.C, X)
        dobj = float(ws.b @ y) if ws.m else 0.0
        rp = ws.b - ws.apply_A(X)
        AtY = ws.apply_At(y)
        Rd = [ws.C[k] - S[k] - AtY[k] for k in range(ws.nblocks)]

        pinf = float(np.linalg.norm(rp)) / ws.b_scale
        dinf = np.sqrt(sum(float(np.sum(R * R)) for R in Rd)) / ws.c_scale
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        mu = ws.inner(X, S) / ws.total_dim

        score = max(pinf, dinf, gap)
        if score < best_score:
            best_score = score
            best = ConicSolution(
                status=STATUS_MAX_ITERATIONS,
                X=[Xk.copy() for Xk in X],
                y=y.copy(),
                S=[Sk.copy() for Sk in S],
                primal_objective=pobj,
                dual_objective=dobj,
                iterations=iteration,
            )

        if (
            pinf <= settings.feasibility_tol
            and dinf <= settings.feasibility_tol
            and gap <= settings.gap_tol
        ):
            status = STATUS_OPTIMAL
            message = ""
            break

        # Divergence heuristics. A dual ray with vanishing normalized
        # residual proves primal infeasibility; the primal mirror proves
        # unboundedness.
        if ws.m:
            t = float(ws.b @ y)
            if t > settings.divergence_scale * ws.c_scale:
                ray = np.sqrt(
                    sum(float(np.sum((ws.C[k] - Rd[k]) ** 2)) for k in range(ws.nblocks))
                )
                if ray / t <= settings.ray_residual_tol * ws.c_scale:
                    status = STATUS_INFEASIBLE
                    message = "dual improving ray found (primal infeasible)"
                    break
        xnorm = np.sqrt(ws.inner(X, X))
        if pobj < -settings.divergence_scale * ws.b_scale and xnorm > 0:
            ray_res = float(np.linalg.norm(ws.apply_A(X))) / xnorm
            if ray_res <= settings.ray_residual_tol * ws.b_scale:
                status = STATUS_UNBOUNDED
                message = "primal improving ray found (dual infeasible)"
                break

        X_chols = [_chol(Xk) for Xk in X]
        S_chols = [_chol(Sk) for Sk in S]
        if any(L is None for L in X_chols) or any(L is None for L in S_chols):
            status = STATUS_NUMERICAL_FAILURE
            message = "iterate left the cone (Cholesky breakdown)"
            break
        S_inv = []
        for k, L in enumerate(S_chols):
            Ik = np.eye(ws.sizes[k])
            S_inv.append(sla.cho_solve((L, True), Ik, check_finite=False))

        # Schur complement B[i, j] = sum_k tr(A_ik X_k A_jk Sinv_k).
        # W_jk = X_k A_jk Sinv_k is computed once per (j, block).
        B = np.zeros((ws.m, ws.m))
        block_to_cons: dict[int, list[int]] = {}
        for i in range(ws.m):
            for k in ws.A[i]:
                block_to_cons.setdefault(k, []).append(i)
        for j in range(ws.m):
            for k, Ajk in ws.A[j].items():
                WjkT = (X[k] @ Ajk @ S_inv[k]).T
                for i in block_to_cons.get(k, ()):
                    if i > j:
                        continue
                    B[i, j] += float(np.sum(ws.A[i][k] * WjkT))
        B = B + np.triu(B, 1).T

        def schur_solve(rhs: np.ndarray) -> np.ndarray | None:
            if ws.m == 0:
                return np.zeros(0)
            jitter = 0.0
            base = np.trace(B) / max(ws.m, 1)
            for _ in range(4):
                try:
                    Lb = sla.cholesky(
                        B + jitter * np.eye(ws.m), lower=True, check_finite=False
                    )
                    return sla.cho_solve((Lb, True), rhs, check_finite=False)
                except sla.LinAlgError:
                    jitter = max(1e-14 * base, 10.0 * jitter) if jitter else 1e-14 * base
            try:
                return np.linalg.lstsq(B, rhs, rcond=None)[0]
            except np.linalg.LinAlgError:
                return None

        def trace_against_A(M: list[np.ndarray]) -> np.ndarray:
            out = np.empty(ws.m)
            for i, Ai in enumerate(ws.A):
                out[i] = sum(float(np.sum(Ak * M[k].T)) for k, Ak in Ai.items())
            return out

        # Predictor: pure Newton step toward feasibility (sigma = 0).
        XRd_Sinv = [X[k] @ Rd[k] @ S_inv[k] for k in range(ws.nblocks)]
        rhs_aff = ws.b + trace_against_A(XRd_Sinv)
        dy_aff = schur_solve(rhs_aff)
        if dy_aff is None:
            status = STATUS_NUMERICAL_FAILURE
            message = "Schur complement factorization failed"
            break
        At_dy = ws.apply_At(dy_aff)
        dS_aff = [Rd[k] - At_dy[k] for k in range(ws.nblocks)]
        dX_aff = [
            _sym(-X[k] - X[k] @ dS_aff[k] @ S_inv[k]) for k in range(ws.nblocks)
        ]

        ap = min(
            (tau * _max_step(X_chols[k], dX_aff[k]) for k in range(ws.nblocks)),
            default=np.inf,
        )
        ad = min(
            (tau * _max_step(S_chols[k], dS_aff[k]) for k in range(ws.nblocks)),
            default=np.inf,
        )
        ap = min(1.0, ap)
        ad = min(1.0, ad)

        mu_aff = (
            ws.inner(
                [X[k] + ap * dX_aff[k] for k in range(ws.nblocks)],
                [S[k] + ad * dS_aff[k] for k in range(ws.nblocks)],
            )
            / ws.total_dim
        )
        sigma = min(1.0, max(_MIN_SIGMA, (max(mu_aff, 0.0) / mu) ** 3))

        # Corrector: recenter to sigma * mu and compensate the
        # second-order term dX_aff dS_aff.
        Corr = [
            (X[k] @ Rd[k] + dX_aff[k] @ dS_aff[k]) @ S_inv[k]
            for k in range(ws.nblocks)
        ]
        smu = sigma * mu
        rhs = ws.b - smu * np.array(
            [
                sum(float(np.sum(Ak * S_inv[k])) for k, Ak in Ai.items())
                for Ai in ws.A
            ]
        )
        rhs += trace_against_A(Corr)
        dy = schur_solve(rhs)
        if dy is None:
            status = STATUS_NUMERICAL_FAILURE
            message = "Schur complement factorization failed"
            break
        At_dy = ws.apply_At(dy)
        dS = [Rd[k] - At_dy[k] for k in range(ws.nblocks)]
        dX = [
            _sym(
                smu * S_inv[k]
                - X[k]
                - X[k] @ dS[k] @ S_inv[k]
                - (dX_aff[k] @ dS_aff[k]) @ S_inv[k]
            )
            for k in range(ws.nblocks)
        ]

        ap = min(
            (tau * _max_step(X_chols[k], dX[k]) for k in range(ws.nblocks)),
            default=np.inf,
        )
        ad = min(
            (tau * _max_step(S_chols[k], dS[k]) for k in range(ws.nblocks)),
            default=np.inf,
        )
        ap = min(1.0, ap)
        ad = min(1.0, ad)

        if ap < _STALL_STEP and ad < _STALL_STEP:
            stalls += 1
            if stalls >= 3:
                status = STATUS_NUMERICAL_FAILURE
                message = "step lengths collapsed"
                break
        else:
            stalls = 0

        for k in range(ws.nblocks):
            X[k] = _sym(X[k] + ap * dX[k])
            S[k] = _sym(S[k] + ad * dS[k])
        y = y + ad * dy
    else:
        iterations = settings.max_iterations

    if status == STATUS_OPTIMAL:
        solution = ConicSolution(
            status=STATUS_OPTIMAL,
            X=X,
            y=y,
            S=S,
            primal_objective=ws.inner(ws.C, X),
            dual_objective=float(ws.b @ y) if ws.m else 0.0,
            iterations=iterations,
            message=message,
        )
        report = verify_solution(
            program, solution, settings.feasibility_tol, settings.gap_tol
        )
        if not report.ok:
            solution.status = STATUS_NUMERICAL_FAILURE
            solution.message = (
                "terminated at tolerances but independent verification failed: "
                f"pinf={report.primal_residual:.2e} dinf={report.dual_residual:.2e} "
                f"gap={report.relative_gap:.2e}"
            )
        return solution

    if status in (STATUS_INFEASIBLE, STATUS_UNBOUNDED):
        return ConicSolution(
            status=status,
            X=X,
            y=y,
            S=S,
            primal_objective=ws.inner(ws.C, X),
            dual_objective=float(ws.b @ y) if ws.m else 0.0,
            iterations=iterations,
            message=message,
        )

    # Max iterations or numerical failure: hand back the best iterate seen.
    fallback = best or ConicSolution(
        status=status,
        X=X,
        y=y,
        S=S,
        primal_objective=ws.inner(ws.C, X),
        dual_objective=float(ws.b @ y) if ws.m else 0.0,
        iterations=iterations,
    )
    fallback.status = status
    fallback.message = message
    fallback.iterations = iterations
    return fallback
