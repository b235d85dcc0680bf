"""Line-oriented, deterministic run reports.

A report is a ``RUN`` header, one ``CHECK`` line per record, optional
``NOTE`` lines and a trailing ``SUMMARY`` line.  Floats are written with
``repr`` so reports round-trip exactly and are byte-stable for fixed inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

__version__ = "0.1.0"


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def fmt_point(p: Sequence[float]) -> str:
    return ",".join(fmt_float(x) for x in p)


def _token(value) -> str:
    if isinstance(value, float):
        return fmt_float(value)
    text = str(value)
    return "_".join(text.split()) or "-"


@dataclass(frozen=True)
class Record:
    check: str
    point: tuple[float, ...]
    left: float
    right: float
    resid: float
    flags: tuple[str, ...] = ()
    passed: bool = True

    def line(self) -> str:
        flags = ",".join(_token(f) for f in self.flags) if self.flags else "-"
        return (
            f"CHECK {_token(self.check)} POINT {fmt_point(self.point)} "
            f"LEFT {fmt_float(self.left)} RIGHT {fmt_float(self.right)} "
            f"RESID {fmt_float(self.resid)} FLAGS {flags} VERDICT {'pass' if self.passed else 'fail'}"
        )


@dataclass
class RunReport:
    command: str
    spec_name: str
    digest: str
    seed: int
    tol: float
    rank_tol: float
    records: list[Record] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    summary: dict[str, object] = field(default_factory=dict)
    passed: bool = True
    version: str = __version__

    def sorted_records(self) -> list[Record]:
        """Records ordered by point, then check name (stable otherwise)."""
        return sorted(self.records, key=lambda r: (r.point, r.check))

    def render(self) -> str:
        lines = [
            f"RUN version={self.version} command={self.command} spec={_token(self.spec_name)} "
            f"digest={self.digest} seed={self.seed} tol={fmt_float(self.tol)} rank_tol={fmt_float(self.rank_tol)}"
        ]
        lines += [r.line() for r in self.sorted_records()]
        lines += [f"NOTE {n}" for n in self.notes]
        extra = " ".join(f"{k}={_token(v)}" for k, v in self.summary.items())
        failed = sum(not r.passed for r in self.records)
        lines.append(
            f"SUMMARY records={len(self.records)} failed={failed}"
            + (f" {extra}" if extra else "")
            + f" result={'pass' if self.passed else 'fail'}"
        )
        return "\n".join(lines) + "\n"


def parse_report_line(line: str) -> dict[str, str]:
    """Split a ``CHECK`` line into its keyword fields (used by tests and scripts)."""
    parts = line.split()
    if not parts or parts[0] != "CHECK":
        raise ValueError("not a CHECK line")
    return {parts[i].lower(): parts[i + 1] for i in range(0, len(parts) - 1, 2)}
