"""Dense block-diagonal semidefinite programming: model, solver, file I/O."""

from .program import (
    ConicProgram,
    ConicSolution,
    MatrixEntry,
    SolveSettings,
    VerificationReport,
    verify_solution,
)
from .solver import solve
from .sdpa import export_sdpa, import_sdpa, SdpaParseError, solve_via_files

__all__ = [
    "ConicProgram",
    "ConicSolution",
    "MatrixEntry",
    "SolveSettings",
    "VerificationReport",
    "verify_solution",
    "solve",
    "export_sdpa",
    "import_sdpa",
    "SdpaParseError",
    "solve_via_files",
]
