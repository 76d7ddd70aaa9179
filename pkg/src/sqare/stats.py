"""Exact paired statistics for two-model comparison.

McNemar's exact two-sided test (no continuity correction) and Cohen's
kappa are computed with exact rational arithmetic; conversion to
decimals happens only at display time, with half-away-from-zero
rounding. The delta-accuracy confidence interval defaults to the
paired-difference normal approximation

    delta +/- z * sqrt((b + c) - (b - c)^2 / n) / n

which has zero width exactly when b = c = 0. A Newcombe method-10
square-and-add interval built from Wilson limits is available as an
explicit alternative (``method="newcombe"``).

All functions here are pure.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .studydef import CONDITION_ORDER, ConditionKind

Z_95 = 1.959964
SUPPRESSION_THRESHOLD = 5  # display rule: discordant total below this prints "-"


class StatsError(ValueError):
    pass


@dataclass(frozen=True)
class ContingencyTable:
    """Paired 2x2 counts: a both correct, b first-only, c second-only, d both wrong."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self) -> None:
        if min(self.a, self.b, self.c, self.d) < 0:
            raise StatsError("cell counts must be non-negative")
        if self.n < 1:
            raise StatsError("table must contain at least one pair")

    @property
    def n(self) -> int:
        return self.a + self.b + self.c + self.d

    def render(self) -> str:
        return f"({self.a}, {self.b}; {self.c}, {self.d})"


def mcnemar_exact(table: ContingencyTable) -> Optional[Fraction]:
    """Exact two-sided p as a Fraction; None when there are no discordant pairs."""
    b, c = table.b, table.c
    m = b + c
    if m == 0:
        return None
    tail = sum(math.comb(m, k) for k in range(min(b, c) + 1))
    p = Fraction(2 * tail, 2**m)
    return min(p, Fraction(1))


def _wilson(successes: int, n: int, z: float = Z_95) -> Tuple[float, float]:
    p = successes / n
    z2 = z * z
    center = (p + z2 / (2 * n)) / (1 + z2 / n)
    half = z * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n)
    return center - half, center + half


def delta_accuracy_ci(
    table: ContingencyTable, confidence: float = 0.95, method: str = "paired-difference"
) -> Tuple[Fraction, float, float]:
    """(delta, ci_low, ci_high) as proportions, bounds clamped to [-1, 1]."""
    if confidence != 0.95:
        raise StatsError("only 95% confidence supported")
    n = table.n
    delta = Fraction(table.b - table.c, n)
    if method == "paired-difference":
        variance_term = (table.b + table.c) - (table.b - table.c) ** 2 / n
        half = Z_95 * math.sqrt(max(variance_term, 0.0)) / n
        low, high = float(delta) - half, float(delta) + half
    elif method == "newcombe":
        # Newcombe method 10: square-and-add of Wilson limits for the two
        # marginal accuracies, ignoring the pairing correlation.
        p1, p2 = (table.a + table.b) / n, (table.a + table.c) / n
        l1, u1 = _wilson(table.a + table.b, n)
        l2, u2 = _wilson(table.a + table.c, n)
        d = p1 - p2
        low = d - math.sqrt((p1 - l1) ** 2 + (u2 - p2) ** 2)
        high = d + math.sqrt((u1 - p1) ** 2 + (p2 - l2) ** 2)
    else:
        raise StatsError(f"unknown CI method {method!r}")
    return delta, max(low, -1.0), min(high, 1.0)


def cohens_kappa(table: ContingencyTable) -> Optional[Fraction]:
    """Exact kappa as a Fraction; None when expected agreement is 1."""
    a, b, c, d, n = table.a, table.b, table.c, table.d, table.n
    p_o = Fraction(a + d, n)
    p_e = Fraction((a + b) * (a + c) + (c + d) * (b + d), n * n)
    if p_e == 1:
        return None
    return (p_o - p_e) / (1 - p_e)


def round_half_away(value: Union[Fraction, float], digits: int) -> Decimal:
    if isinstance(value, Fraction):
        dec = Decimal(value.numerator) / Decimal(value.denominator)
    else:
        dec = Decimal(repr(float(value)))
    return dec.quantize(Decimal(1).scaleb(-digits), rounding=ROUND_HALF_UP)


def _fmt_pp(value: Union[Fraction, float], signed: bool = True) -> str:
    """Percentage points to 1 decimal, signed except for exact zero."""
    pp = round_half_away(value * 100 if isinstance(value, Fraction) else value * 100, 1)
    if pp == 0:
        return "0.0"
    return f"+{pp}" if pp > 0 else str(pp)


@dataclass(frozen=True)
class PairedComparison:
    table: ContingencyTable
    p_value: Optional[Fraction]
    suppressed: bool
    delta: Fraction
    ci_low: float
    ci_high: float
    kappa: Optional[Fraction]
    p_o: Fraction
    p_e: Fraction


def paired_comparison(table: ContingencyTable, ci_method: str = "paired-difference") -> PairedComparison:
    delta, low, high = delta_accuracy_ci(table, method=ci_method)
    n = table.n
    return PairedComparison(
        table=table,
        p_value=mcnemar_exact(table),
        suppressed=(table.b + table.c) < SUPPRESSION_THRESHOLD,
        delta=delta,
        ci_low=low,
        ci_high=high,
        kappa=cohens_kappa(table),
        p_o=Fraction(table.a + table.d, n),
        p_e=Fraction((table.a + table.b) * (table.a + table.c) + (table.c + table.d) * (table.b + table.d), n * n),
    )


@dataclass(frozen=True)
class CompareRow:
    language: str
    condition: ConditionKind
    comparison: PairedComparison

    @property
    def contingency_text(self) -> str:
        return self.comparison.table.render()

    @property
    def p_text(self) -> str:
        c = self.comparison
        if c.p_value is None or c.suppressed:
            return "-"
        return str(round_half_away(c.p_value, 4))

    @property
    def delta_text(self) -> str:
        c = self.comparison
        return f"{_fmt_pp(c.delta)} [{_fmt_pp(c.ci_low)}, {_fmt_pp(c.ci_high)}]"

    @property
    def kappa_text(self) -> str:
        kappa = self.comparison.kappa
        if kappa is None:
            return "- (κ undefined)"
        return str(round_half_away(kappa, 3))


def compare(
    tables: Dict[Tuple[str, ConditionKind], ContingencyTable],
    ci_method: str = "paired-difference",
) -> List[CompareRow]:
    """One row per (language, condition), conditions in canonical order."""
    if not tables:
        raise StatsError("no contingency tables supplied")
    languages = sorted({lang for lang, _ in tables})
    rows: List[CompareRow] = []
    for lang in languages:
        for condition in CONDITION_ORDER:
            key = (lang, condition)
            if key in tables:
                rows.append(CompareRow(lang, condition, paired_comparison(tables[key], ci_method)))
    return rows


def format_report(rows: Sequence[CompareRow], model_a: str, model_b: str) -> str:
    """Aligned text report, one section per language."""
    lines: List[str] = []
    header = ("Context", "Contingency (a,b;c,d)", "McNemar p", "Δ-Acc (95% CI) [pp]", "Cohen's κ")
    by_language: Dict[str, List[CompareRow]] = {}
    for row in rows:
        by_language.setdefault(row.language, []).append(row)
    for lang in sorted(by_language):
        lines.append(f"Paired statistical comparison ({lang}): {model_a} vs {model_b}")
        table_rows = [header]
        for row in by_language[lang]:
            table_rows.append(
                (row.condition.value, row.contingency_text, row.p_text, row.delta_text, row.kappa_text)
            )
        widths = [max(len(r[i]) for r in table_rows) for i in range(len(header))]
        for r in table_rows:
            lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(r)).rstrip())
        lines.append("")
    lines.append("p suppressed ('-') when b + c < 5 or no discordant pairs.")
    return "".join(line + "\n" for line in lines)


def report_tsv(rows: Sequence[CompareRow]) -> str:
    """TSV with unrounded decimal columns for downstream tooling."""
    out = [
        "language\tcondition\ta\tb\tc\td\tp_value\tsuppressed\tdelta\tci_low\tci_high\tkappa\tp_o\tp_e"
    ]
    for row in rows:
        c = row.comparison
        t = c.table
        out.append(
            "\t".join(
                [
                    row.language,
                    row.condition.value,
                    str(t.a),
                    str(t.b),
                    str(t.c),
                    str(t.d),
                    repr(float(c.p_value)) if c.p_value is not None else "NA",
                    str(c.suppressed).lower(),
                    repr(float(c.delta)),
                    repr(c.ci_low),
                    repr(c.ci_high),
                    repr(float(c.kappa)) if c.kappa is not None else "NA",
                    repr(float(c.p_o)),
                    repr(float(c.p_e)),
                ]
            )
        )
    return "".join(line + "\n" for line in out)
