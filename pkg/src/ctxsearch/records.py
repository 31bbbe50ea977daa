"""Per-trial result record shared by the meta-algorithm and the harness."""

from __future__ import annotations

from dataclasses import dataclass

CSV_HEADER = (
    "study,algo,d,trial,seed,n_labeled,m_total,rho_configured,err,b1,b2,"
    "labels_trisection,labels_al1,labels_al2,wall_ms"
)


@dataclass
class RunRecord:
    """One trial's outcome: estimation error plus label/sample accounting."""

    study: str
    algo: str
    d: int
    trial: int
    seed: int
    n_labeled: int
    m_total: int
    rho_configured: float | None
    err: float
    b1: float
    b2: float
    phase_labels: tuple[int, int, int]  # (trisection, al1/half1, al2/half2)
    wall_ms: int

    def __post_init__(self):
        if self.err < 0:
            raise ValueError(f"estimation error must be >= 0, got {self.err}")
        if self.m_total < self.n_labeled:
            raise ValueError(
                f"total samples {self.m_total} < labeled samples {self.n_labeled}"
            )

    def sort_key(self):
        # The CSV carries no explicit budget column, so the tail keys make the
        # order total across budget and rho sweeps.
        rho = -1.0 if self.rho_configured is None else self.rho_configured
        return (self.study, self.algo, self.d, self.trial, rho, self.n_labeled, self.seed)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.9g}"
    return str(x)


def record_to_row(r: RunRecord) -> str:
    t, a1, a2 = r.phase_labels
    return ",".join(
        [
            r.study,
            r.algo,
            str(r.d),
            str(r.trial),
            str(r.seed),
            str(r.n_labeled),
            str(r.m_total),
            _fmt(r.rho_configured),
            _fmt(float(r.err)),
            _fmt(float(r.b1)),
            _fmt(float(r.b2)),
            str(t),
            str(a1),
            str(a2),
            str(r.wall_ms),
        ]
    )


def row_to_record(line: str) -> RunRecord:
    parts = line.rstrip("\n").split(",")
    if len(parts) != 15:
        raise ValueError(f"expected 15 columns, got {len(parts)}: {line!r}")
    return RunRecord(
        study=parts[0],
        algo=parts[1],
        d=int(parts[2]),
        trial=int(parts[3]),
        seed=int(parts[4]),
        n_labeled=int(parts[5]),
        m_total=int(parts[6]),
        rho_configured=None if parts[7] == "" else float(parts[7]),
        err=float(parts[8]),
        b1=float(parts[9]),
        b2=float(parts[10]),
        phase_labels=(int(parts[11]), int(parts[12]), int(parts[13])),
        wall_ms=int(parts[14]),
    )
