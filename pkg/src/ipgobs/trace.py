"""Per-iteration run records and their CSV projection.

Each inner row snapshots the iterate *before* inner step ``i`` (so its
``alpha`` is the step size about to be applied and ``contraction`` is the
factor realized by that step).  Each sampling instant additionally gets a
summary row with ``i = -1`` holding the post-iteration state: the
propagated-estimate error and the final preconditioner numbers.

CSV schema (header is bit-exact, one row per inner iteration plus the
summary row): ``k,i,alpha,err_w,err_xhat,precond_residual,err_K`` with
empty fields wherever ground truth was not supplied.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

CSV_HEADER = "k,i,alpha,err_w,err_xhat,precond_residual,err_K"

SUMMARY_I = -1


@dataclass(frozen=True)
class TraceRecord:
    k: int
    i: int
    alpha: Optional[float] = None
    err_w: Optional[float] = None
    err_xhat: Optional[float] = None
    precond_residual: Optional[float] = None
    err_K: Optional[float] = None
    # spectral norm of I - alpha*(H_x(w) + beta*I) for the step taken at
    # this iterate; kept in memory only (not part of the CSV schema)
    contraction: Optional[float] = None

    def is_summary(self):
        return self.i == SUMMARY_I


class RunTrace:
    """Append-only record of one observer run."""

    def __init__(self):
        self._records = []

    def append(self, record):
        if self._records and record.k < self._records[-1].k:
            raise ValueError("trace records must be appended in instant order")
        self._records.append(record)

    def __len__(self):
        return len(self._records)

    def __iter__(self):
        return iter(self._records)

    @property
    def records(self):
        return tuple(self._records)

    def inner_records(self):
        return [r for r in self._records if not r.is_summary()]

    def summary_records(self):
        return [r for r in self._records if r.is_summary()]

    def first_instant(self):
        if not self._records:
            return None
        return self._records[0].k

    def per_instant_errors(self):
        """(instants, |xhat - x|) pairs from summary rows carrying truth."""
        rows = [r for r in self.summary_records() if r.err_xhat is not None]
        return [r.k for r in rows], [r.err_xhat for r in rows]

    def contractions(self):
        """(k, i, value) triples of recorded step contraction factors."""
        return [
            (r.k, r.i, r.contraction)
            for r in self.inner_records()
            if r.contraction is not None
        ]

    def to_csv_text(self):
        lines = [CSV_HEADER]
        for r in self._records:
            lines.append(
                ",".join(
                    _cell(v)
                    for v in (
                        r.k,
                        r.i,
                        r.alpha,
                        r.err_w,
                        r.err_xhat,
                        r.precond_residual,
                        r.err_K,
                    )
                )
            )
        return "\n".join(lines) + "\n"


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return repr(float(value))
