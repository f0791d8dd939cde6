"""Structured check reports with deterministic JSON and CSV rendering."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional


def fmt_q(q) -> str:
    """Render an exact rational (or int) as 'p' or 'p/q'."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return "%d/%d" % (q.numerator, q.denominator)


def parse_q(s: str) -> Fraction:
    return Fraction(s)


@dataclass
class CheckRow:
    """One verified statement.

    kind 'exact' rows decide pass/fail; 'trend' rows report monotone series
    diagnostics; 'info' rows carry observed values with no verdict.
    """

    check: str
    subject: str
    kind: str
    passed: Optional[bool]
    lhs: str = ""
    rhs: str = ""
    witness: str = ""

    def to_obj(self) -> dict:
        return {
            "check": self.check,
            "subject": self.subject,
            "kind": self.kind,
            "passed": self.passed,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "witness": self.witness,
        }


@dataclass
class VerifyReport:
    """An ordered list of check rows plus named numeric series."""

    title: str
    rows: list[CheckRow] = field(default_factory=list)
    series: dict[str, list[dict]] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def add(self, check: str, subject: str, kind: str, passed: Optional[bool],
            lhs="", rhs="", witness="") -> CheckRow:
        row = CheckRow(check, subject, kind, passed, str(lhs), str(rhs), str(witness))
        self.rows.append(row)
        return row

    def extend(self, other: "VerifyReport") -> None:
        self.rows.extend(other.rows)
        for name, rows in other.series.items():
            self.series.setdefault(name, []).extend(rows)

    @property
    def exact_rows(self) -> list[CheckRow]:
        return [r for r in self.rows if r.kind == "exact"]

    @property
    def all_exact_passed(self) -> bool:
        return all(r.passed for r in self.exact_rows)

    def failures(self) -> list[CheckRow]:
        return [r for r in self.exact_rows if not r.passed]

    def to_obj(self) -> dict:
        return {
            "title": self.title,
            "passed": self.all_exact_passed,
            "meta": self.meta,
            "rows": [r.to_obj() for r in self.rows],
            "series": self.series,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_obj(), indent=2, sort_keys=True)

    def series_csv(self, name: str) -> str:
        rows = self.series.get(name, [])
        out = io.StringIO()
        if not rows:
            return ""
        cols = sorted({k for r in rows for k in r})
        w = csv.DictWriter(out, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(r)
        return out.getvalue()
