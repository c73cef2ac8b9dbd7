"""Benchmark report rows and deterministic CSV emission.

Schema (version ifed-bench-v1), one row per run:

    schema, benchmark, scheme, element, kernel, mfac, n_cells, dofs,
    dx, dX, dt, t_final, error_l1, error_l2, error_linf, qoi, reference,
    kappa_s, eta_s, kappa_b, eta_b, load

Optional timing columns (time_assembly, time_projection, time_spreading,
time_interpolation, time_fluid, structure_solve_iterations) are appended
only when requested: timings are inherently non-reproducible, while the
default CSV is byte-identical for identical configurations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

SCHEMA = "ifed-bench-v1"

_BASE_COLUMNS = [
    "schema", "benchmark", "scheme", "element", "kernel", "mfac", "n_cells",
    "dofs", "dx", "dX", "dt", "t_final", "error_l1", "error_l2", "error_linf",
    "qoi", "reference", "kappa_s", "eta_s", "kappa_b", "eta_b", "load",
]
_TIMING_COLUMNS = [
    "time_assembly", "time_projection", "time_spreading",
    "time_interpolation", "time_fluid", "structure_solve_iterations",
]


@dataclass
class BenchmarkRow:
    benchmark: str
    scheme: str
    element: str
    kernel: str
    mfac: float
    n_cells: int
    dofs: int
    dx: float
    dX: float
    dt: float
    t_final: float
    error_l1: float | None = None
    error_l2: float | None = None
    error_linf: float | None = None
    qoi: float | None = None
    reference: float | None = None
    kappa_s: float = 0.0
    eta_s: float = 0.0
    kappa_b: float = 0.0
    eta_b: float = 0.0
    load: float = 0.0
    time_assembly: float = 0.0
    time_projection: float = 0.0
    time_spreading: float = 0.0
    time_interpolation: float = 0.0
    time_fluid: float = 0.0
    structure_solve_iterations: int = 0
    extra: dict = field(default_factory=dict)

    def values(self, columns) -> list[str]:
        out = []
        for c in columns:
            if c == "schema":
                out.append(SCHEMA)
                continue
            v = getattr(self, c)
            out.append(_format(v))
        return out


def _format(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_csv(rows: list[BenchmarkRow], path, include_timings: bool = False) -> None:
    """One row per run, deterministic column order and float formatting."""
    columns = _BASE_COLUMNS + (_TIMING_COLUMNS if include_timings else [])
    with open(path, "w", newline="") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(row.values(columns)) + "\n")


def read_csv(path) -> tuple[list[str], list[dict]]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = []
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            rows.append(dict(zip(header, line.split(","))))
    return header, rows
