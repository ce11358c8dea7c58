"""SDPA sparse text format and the file-based solver backend.

Export layout (one program per file):

    m                 number of equality constraints
    nblocks           number of PSD blocks
    s1 s2 ... sK      block sizes
    b1 b2 ... bm      right-hand sides
    matno blkno i j v one line per stored upper-triangle entry

matno 0 carries the objective, matno i >= 1 the i-th equality; blkno,
i, j are 1-based and i <= j. Entries are emitted sorted by
(matno, blkno, i, j), so the output is deterministic and importing an
exported file reproduces the program exactly. Lines starting with '"' or
'*' are comments.

The file backend runs an external command on the exported file and
reads back a JSON result carrying status, objectives and the full
primal/dual solution, so downstream consumers see no difference between
the embedded and the file path. The default command round-trips through
this package's own worker process (`python -m sipop.conic.sdpa`); any
SDPA-speaking solver can be substituted via a command template.
"""

from __future__ import annotations

import json
import os
import shlex
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from .program import ConicProgram, ConicSolution, MatrixEntry, SolveSettings

RESULT_SCHEMA_VERSION = 1
COMMAND_ENV_VAR = "SIPOP_SDPA_CMD"


class SdpaParseError(ValueError):
    """Malformed SDPA sparse input, with a line diagnostic."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _fmt(value: float) -> str:
    # repr gives the shortest decimal that round-trips a double.
    return repr(float(value))


def export_sdpa(program: ConicProgram) -> str:
    """Serialize a program to SDPA sparse text."""
    lines = []
    if program.name:
        lines.append(f'"{program.name}')
    lines.append(str(program.n_equalities))
    lines.append(str(len(program.block_sizes)))
    lines.append(" ".join(str(s) for s in program.block_sizes))
    lines.append(" ".join(_fmt(b) for _, b in program.equalities) or "")
    rows: list[tuple[int, int, int, int, float]] = []
    for blk, r, c, v in program.objective:
        rows.append((0, blk + 1, r + 1, c + 1, v))
    for i, (fn, _) in enumerate(program.equalities):
        for blk, r, c, v in fn:
            rows.append((i + 1, blk + 1, r + 1, c + 1, v))
    rows.sort(key=lambda t: t[:4])
    for matno, blkno, i, j, v in rows:
        lines.append(f"{matno} {blkno} {i} {j} {_fmt(v)}")
    return "\n".join(lines) + "\n"


def _tokens(text: str):
    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped[0] in '"*':
            continue
        cleaned = stripped
        for ch in "{}(),":
            cleaned = cleaned.replace(ch, " ")
        yield line_no, cleaned.split()


def import_sdpa(text: str) -> ConicProgram:
    """Parse SDPA sparse text; the inverse of export_sdpa on its image."""
    stream = _tokens(text)

    def next_line(what: str) -> tuple[int, list[str]]:
        try:
            return next(stream)
        except StopIteration:
            raise SdpaParseError(0, f"unexpected end of input, expected {what}") from None

    line_no, toks = next_line("constraint count")
    try:
        m = int(toks[0])
    except (ValueError, IndexError):
        raise SdpaParseError(line_no, f"expected constraint count, got {toks!r}") from None

    line_no, toks = next_line("block count")
    try:
        nblocks = int(toks[0])
    except (ValueError, IndexError):
        raise SdpaParseError(line_no, f"expected block count, got {toks!r}") from None
    if nblocks < 1:
        raise SdpaParseError(line_no, f"block count must be >= 1, got {nblocks}")

    sizes: list[int] = []
    while len(sizes) < nblocks:
        line_no, toks = next_line("block sizes")
        for t in toks:
            try:
                s = int(t)
            except ValueError:
                raise SdpaParseError(line_no, f"non-numeric block size {t!r}") from None
            if s < 1:
                raise SdpaParseError(
                    line_no, f"block size {s} unsupported (diagonal/LP blocks not modeled)"
                )
            sizes.append(s)
    if len(sizes) != nblocks:
        raise SdpaParseError(line_no, f"expected {nblocks} block sizes, got {len(sizes)}")

    rhs: list[float] = []
    while len(rhs) < m:
        line_no, toks = next_line("right-hand sides")
        for t in toks:
            try:
                rhs.append(float(t))
            except ValueError:
                raise SdpaParseError(line_no, f"non-numeric right-hand side {t!r}") from None
    if len(rhs) != m:
        raise SdpaParseError(line_no, f"expected {m} right-hand sides, got {len(rhs)}")

    objective: list[MatrixEntry] = []
    constraints: list[list[MatrixEntry]] = [[] for _ in range(m)]
    for line_no, toks in stream:
        if len(toks) != 5:
            raise SdpaParseError(line_no, f"expected 'matno blkno i j value', got {toks!r}")
        try:
            matno, blkno, i, j = (int(t) for t in toks[:4])
            value = float(toks[4])
        except ValueError:
            raise SdpaParseError(line_no, f"non-numeric field in {toks!r}") from None
        if not 0 <= matno <= m:
            raise SdpaParseError(line_no, f"matrix index {matno} out of range 0..{m}")
        if not 1 <= blkno <= nblocks:
            raise SdpaParseError(line_no, f"block index {blkno} out of range 1..{nblocks}")
        if not 1 <= i <= j <= sizes[blkno - 1]:
            raise SdpaParseError(
                line_no, f"entry ({i}, {j}) outside upper triangle of block {blkno}"
            )
        entry = MatrixEntry(blkno - 1, i - 1, j - 1, value)
        if matno == 0:
            objective.append(entry)
        else:
            constraints[matno - 1].append(entry)

    return ConicProgram(
        block_sizes=sizes,
        objective=tuple(objective),
        equalities=[(tuple(fn), b) for fn, b in zip(constraints, rhs)],
        provenance="sdpa-import",
    )


# -- result files ------------------------------------------------------


def solution_to_dict(solution: ConicSolution) -> dict:
    return {
        "schema": RESULT_SCHEMA_VERSION,
        "status": solution.status,
        "primal_objective": solution.primal_objective,
        "dual_objective": solution.dual_objective,
        "iterations": solution.iterations,
        "message": solution.message,
        "y": list(map(float, solution.y)),
        "X": [blk.tolist() for blk in solution.X],
        "S": [blk.tolist() for blk in solution.S],
    }


def solution_from_dict(data: dict) -> ConicSolution:
    return ConicSolution(
        status=str(data["status"]),
        X=[np.asarray(blk, dtype=float) for blk in data["X"]],
        y=np.asarray(data["y"], dtype=float),
        S=[np.asarray(blk, dtype=float) for blk in data["S"]],
        primal_objective=float(data["primal_objective"]),
        dual_objective=float(data["dual_objective"]),
        iterations=int(data.get("iterations", 0)),
        message=str(data.get("message", "")),
    )


def default_worker_command() -> list[str]:
    return [sys.executable, "-m", "sipop.conic.sdpa", "{in}", "{out}"]


def solve_via_files(
    program: ConicProgram,
    settings: SolveSettings | None = None,
    command: list[str] | str | None = None,
) -> ConicSolution:
    """Solve through the SDPA file interface.

    The program is exported to a temporary .dat-s file, the worker
    command is run with {in} and {out} substituted, and the JSON result
    file is read back. The command defaults to SIPOP_SDPA_CMD from the
    environment, falling back to this package's own worker process.
    """
    settings = settings or SolveSettings()
    if command is None:
        env_cmd = os.environ.get(COMMAND_ENV_VAR)
        command = shlex.split(env_cmd) if env_cmd else default_worker_command()
    elif isinstance(command, str):
        command = shlex.split(command)

    with tempfile.TemporaryDirectory(prefix="sipop-sdpa-") as tmp:
        in_path = Path(tmp) / "program.dat-s"
        out_path = Path(tmp) / "result.json"
        in_path.write_text(export_sdpa(program))
        argv = [
            arg.replace("{in}", str(in_path)).replace("{out}", str(out_path))
            for arg in command
        ]
        env = dict(os.environ)
        env["SIPOP_SDPA_FEASTOL"] = repr(settings.feasibility_tol)
        env["SIPOP_SDPA_GAPTOL"] = repr(settings.gap_tol)
        env["SIPOP_SDPA_MAXITER"] = str(settings.max_iterations)
        proc = subprocess.run(argv, capture_output=True, text=True, env=env)
        if proc.returncode != 0:
            raise RuntimeError(
                f"sdpa worker failed (exit {proc.returncode}): {proc.stderr.strip()}"
            )
        data = json.loads(out_path.read_text())
    return solution_from_dict(data)


def _worker_main(argv: list[str]) -> int:
    from .solver import solve as embedded_solve

    if len(argv) != 2:
        print("usage: python -m sipop.conic.sdpa <program.dat-s> <result.json>", file=sys.stderr)
        return 2
    program = import_sdpa(Path(argv[0]).read_text())
    settings = SolveSettings(
        feasibility_tol=float(os.environ.get("SIPOP_SDPA_FEASTOL", "1e-8")),
        gap_tol=float(os.environ.get("SIPOP_SDPA_GAPTOL", "1e-8")),
        max_iterations=int(os.environ.get("SIPOP_SDPA_MAXITER", "200")),
    )
    solution = embedded_solve(program, settings)
    Path(argv[1]).write_text(json.dumps(solution_to_dict(solution)))
    return 0


if __name__ == "__main__":
    raise SystemExit(_worker_main(sys.argv[1:]))
