import random
from fractions import Fraction

import pytest

from sqare import stats
from sqare.stats import ContingencyTable
from sqare.studydef import ConditionKind

# Published comparison rows: (language, condition) -> (cells, p, delta, ci, kappa)
PUBLISHED = {
    ("de", ConditionKind.COMPLETE): ((28, 0, 0, 0), "-", "0.0 [0.0, 0.0]", "- (κ undefined)"),
    ("de", ConditionKind.INCOMPLETE): ((10, 4, 8, 6), "0.3877", "-14.3 [-37.9, +9.4]", "0.143"),
    ("de", ConditionKind.CONFLICTING): ((2, 0, 1, 25), "-", "-3.6 [-10.4, +3.3]", "0.781"),
    ("de", ConditionKind.NO_CONTEXT): ((24, 2, 2, 0), "-", "0.0 [-14.0, +14.0]", "-0.077"),
    ("en", ConditionKind.COMPLETE): ((28, 0, 0, 0), "-", "0.0 [0.0, 0.0]", "- (κ undefined)"),
    ("en", ConditionKind.INCOMPLETE): ((27, 1, 0, 0), "-", "+3.6 [-3.3, +10.4]", "0.000"),
    ("en", ConditionKind.CONFLICTING): ((2, 1, 1, 24), "-", "0.0 [-9.9, +9.9]", "0.627"),
    ("en", ConditionKind.NO_CONTEXT): ((14, 0, 9, 5), "0.0039", "-32.1 [-49.4, -14.8]", "0.357"),
}


def _published_rows():
    tables = {key: ContingencyTable(*cells) for key, (cells, *_rest) in PUBLISHED.items()}
    return stats.compare(tables)


class TestPublishedValues:
    def test_every_cell_reproduced(self):
        for row in _published_rows():
            _, p, delta, kappa = PUBLISHED[(row.language, row.condition)]
            assert row.p_text == p, (row.language, row.condition)
            assert row.delta_text == delta, (row.language, row.condition)
            assert row.kappa_text == kappa, (row.language, row.condition)

    def test_exact_p_values(self):
        assert stats.mcnemar_exact(ContingencyTable(10, 4, 8, 6)) == Fraction(2 * sum(
            [1, 12, 66, 220, 495]
        ), 2**12)
        assert stats.mcnemar_exact(ContingencyTable(14, 0, 9, 5)) == Fraction(2, 512)

    def test_exact_kappas(self):
        assert stats.cohens_kappa(ContingencyTable(27, 1, 0, 0)) == 0
        assert stats.cohens_kappa(ContingencyTable(28, 0, 0, 0)) is None

    def test_row_order(self):
        rows = _published_rows()
        assert [(r.language, r.condition) for r in rows[:4]] == [
            ("de", c) for c in (
                ConditionKind.COMPLETE,
                ConditionKind.INCOMPLETE,
                ConditionKind.CONFLICTING,
                ConditionKind.NO_CONTEXT,
            )
        ]


def _binomial_tail_oracle(b, c):
    """Independent exact oracle: Pascal-row construction, no math.comb."""
    m = b + c
    row = [1]
    for _ in range(m):
        row = [x + y for x, y in zip([0] + row, row + [0])]
    tail = sum(row[: min(b, c) + 1])
    return min(Fraction(2 * tail, 2**m), Fraction(1))


class TestMcNemarOracle:
    def test_exhaustive_up_to_30_discordant(self):
        for b in range(31):
            for c in range(31 - b):
                if b + c == 0:
                    assert stats.mcnemar_exact(ContingencyTable(1, 0, 0, 0)) is None
                    continue
                table = ContingencyTable(0, b, c, 0)
                assert stats.mcnemar_exact(table) == _binomial_tail_oracle(b, c), (b, c)

    def test_concordant_cells_irrelevant(self):
        assert stats.mcnemar_exact(ContingencyTable(0, 4, 8, 0)) == stats.mcnemar_exact(
            ContingencyTable(99, 4, 8, 17)
        )


def _random_tables(n, seed):
    rng = random.Random(seed)
    tables = []
    while len(tables) < n:
        a, b, c, d = (rng.randrange(30) for _ in range(4))
        if a + b + c + d > 0:
            tables.append(ContingencyTable(a, b, c, d))
    return tables


class TestProperties:
    def test_swap_symmetry(self):
        for table in _random_tables(1000, seed=5):
            swapped = ContingencyTable(table.a, table.c, table.b, table.d)
            assert stats.mcnemar_exact(table) == stats.mcnemar_exact(swapped)
            assert stats.cohens_kappa(table) == stats.cohens_kappa(swapped)
            delta, low, high = stats.delta_accuracy_ci(table)
            sdelta, slow, shigh = stats.delta_accuracy_ci(swapped)
            assert sdelta == -delta
            assert slow == pytest.approx(-high, abs=1e-12)
            assert shigh == pytest.approx(-low, abs=1e-12)

    def test_delta_inside_ci(self):
        for table in _random_tables(1000, seed=6):
            delta, low, high = stats.delta_accuracy_ci(table)
            assert low <= float(delta) <= high

    def test_zero_width_iff_no_discordance(self):
        # the one-sided all-discordant tables (0,b,0,0)/(0,0,c,0) are the
        # only other zero-variance cases; exclude them to isolate the rule
        for table in _random_tables(1000, seed=7):
            if table.a + table.d == 0 and min(table.b, table.c) == 0:
                continue
            _, low, high = stats.delta_accuracy_ci(table)
            assert (high - low == 0) == (table.b == 0 and table.c == 0)

    def test_perfect_agreement_kappa_one(self):
        rng = random.Random(8)
        checked = 0
        while checked < 1000:
            a, d = rng.randrange(30), rng.randrange(30)
            if a == 0 or d == 0:
                continue  # degenerate marginals leave kappa undefined
            assert stats.cohens_kappa(ContingencyTable(a, 0, 0, d)) == 1
            checked += 1

    def test_p_values_in_unit_interval(self):
        for table in _random_tables(1000, seed=9):
            p = stats.mcnemar_exact(table)
            if p is not None:
                assert 0 < p <= 1


class TestRounding:
    def test_half_away_from_zero(self):
        assert str(stats.round_half_away(Fraction(1, 8), 2)) == "0.13"
        assert str(stats.round_half_away(Fraction(-1, 8), 2)) == "-0.13"
        assert str(stats.round_half_away(0.25, 1)) == "0.3"

    def test_kappa_display(self):
        row = _published_rows()[1]  # de incomplete
        assert row.kappa_text == "0.143"

    def test_unsigned_zero(self):
        assert stats._fmt_pp(Fraction(0)) == "0.0"
        assert stats._fmt_pp(Fraction(1, 28)) == "+3.6"


class TestNewcombe:
    def test_differs_from_default_for_degenerate_table(self):
        table = ContingencyTable(28, 0, 0, 0)
        _, low_default, high_default = stats.delta_accuracy_ci(table)
        _, low_newcombe, high_newcombe = stats.delta_accuracy_ci(table, method="newcombe")
        assert (low_default, high_default) == (0.0, 0.0)
        assert high_newcombe > low_newcombe

    def test_unknown_method_rejected(self):
        with pytest.raises(stats.StatsError):
            stats.delta_accuracy_ci(ContingencyTable(1, 1, 1, 1), method="bogus")


class TestTableValidation:
    def test_negative_cell_rejected(self):
        with pytest.raises(stats.StatsError):
            ContingencyTable(-1, 0, 0, 2)

    def test_empty_table_rejected(self):
        with pytest.raises(stats.StatsError):
            ContingencyTable(0, 0, 0, 0)

    def test_render(self):
        assert ContingencyTable(10, 4, 8, 6).render() == "(10, 4; 8, 6)"


class TestReportText:
    def test_format_report_layout(self):
        text = stats.format_report(_published_rows(), "model-a", "model-b")
        assert "Paired statistical comparison (de): model-a vs model-b" in text
        assert "0.3877" in text and "0.0039" in text
        assert "- (κ undefined)" in text

    def test_tsv_columns(self):
        tsv = stats.report_tsv(_published_rows())
        lines = tsv.splitlines()
        assert lines[0].split("\t")[0] == "language"
        assert all(len(line.split("\t")) == 14 for line in lines)
        assert "NA" in lines[1]  # de complete: no discordant pairs
