"""Benchmark CSV ingestion with strict schema validation.

This package talks to the benchmark harness only through its file formats;
the expected header below is the wire contract.
"""

from __future__ import annotations

from dataclasses import dataclass

EXPECTED_HEADER = (
    "study,algo,d,trial,seed,n_labeled,m_total,rho_configured,err,b1,b2,"
    "labels_trisection,labels_al1,labels_al2,wall_ms"
)


class SchemaError(ValueError):
    """The input file does not match the benchmark CSV schema."""


class NoDataError(ValueError):
    """Structurally valid CSV with no data rows."""


@dataclass(frozen=True)
class Row:
    study: str
    algo: str
    d: int
    trial: int
    n_labeled: int
    m_total: int
    rho: float | None
    err: float


def validate_header(header: str) -> None:
    got = header.rstrip("\n").split(",")
    want = EXPECTED_HEADER.split(",")
    if got == want:
        return
    if len(got) != len(want):
        raise SchemaError(
            f"expected {len(want)} columns, found {len(got)}: {header!r}"
        )
    diffs = [
        f"column {i + 1}: expected {w!r}, found {g!r}"
        for i, (w, g) in enumerate(zip(want, got))
        if w != g
    ]
    raise SchemaError("header mismatch: " + "; ".join(diffs))


def load_rows(path: str) -> list[Row]:
    with open(path, encoding="utf-8") as f:
        header = f.readline()
        if not header:
            raise SchemaError(f"{path} is empty")
        validate_header(header)
        rows = []
        for lineno, line in enumerate(f, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(",")
            if len(parts) != 15:
                raise SchemaError(f"{path}:{lineno}: expected 15 fields")
            try:
                rows.append(
                    Row(
                        study=parts[0],
                        algo=parts[1],
                        d=int(parts[2]),
                        trial=int(parts[3]),
                        n_labeled=int(parts[5]),
                        m_total=int(parts[6]),
                        rho=None if parts[7] == "" else float(parts[7]),
                        err=float(parts[8]),
                    )
                )
            except ValueError as exc:
                raise SchemaError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise NoDataError(f"{path}: no data rows")
    return rows
