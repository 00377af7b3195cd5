import math

import numpy as np
import pytest

from snhmm.data import (
    GpSeries,
    MortalityTable,
    build_gp_series,
    gender_gap,
    load_mortality_table,
    load_series,
    mortality_rate,
)
from snhmm.errors import IngestionError


class TestLoadSeries:
    def test_basic(self, tmp_path):
        f = tmp_path / "s.csv"
        f.write_text("t,value\n1,1\n2,2\n3,3\n")
        s = load_series(f, "value", "t")
        assert np.array_equal(s.values, [1.0, 2.0, 3.0])
        assert s.labels == ("1", "2", "3")

    def test_comment_lines_skipped(self, tmp_path):
        f = tmp_path / "s.csv"
        f.write_text("# meta line\nt,value\n1,0.5\n")
        s = load_series(f, "value")
        assert np.array_equal(s.values, [0.5])

    def test_blank_row_names_row(self, tmp_path):
        f = tmp_path / "s.csv"
        f.write_text("t,value\n1,1\n,\n3,3\n")
        with pytest.raises(IngestionError, match="row 3"):
            load_series(f, "value")

    def test_non_numeric_cell_names_row(self, tmp_path):
        f = tmp_path / "s.csv"
        f.write_text("t,value\n1,1\n2,oops\n")
        with pytest.raises(IngestionError, match="row 3"):
            load_series(f, "value")

    def test_missing_column(self, tmp_path):
        f = tmp_path / "s.csv"
        f.write_text("t,v\n1,1\n")
        with pytest.raises(IngestionError, match="value"):
            load_series(f, "value")

    def test_empty_file(self, tmp_path):
        f = tmp_path / "s.csv"
        f.write_text("")
        with pytest.raises(IngestionError, match="empty"):
            load_series(f, "value")

    def test_round_trip_precision(self, tmp_path):
        from snhmm.report import fmt_float

        rng = np.random.default_rng(0)
        values = rng.standard_normal(50) * 1e3
        f = tmp_path / "s.csv"
        f.write_text("value\n" + "\n".join(fmt_float(v) for v in values) + "\n")
        s = load_series(f, "value")
        assert np.max(np.abs(s.values - values)) < 1e-15 * np.max(np.abs(values))


class TestRates:
    def test_rate(self):
        assert mortality_rate(10.0, 1000.0) == pytest.approx(0.01)

    def test_zero_exposure_rejected(self):
        with pytest.raises(ValueError):
            mortality_rate(5.0, 0.0)

    def test_table_driven(self):
        cases = [(1.0, 10.0), (250.0, 12345.0), (0.0, 99.0)]
        for d, e in cases:
            assert mortality_rate(d, e) == pytest.approx(d / e, rel=1e-15)

    def test_gender_gap_equal_rates(self):
        assert gender_gap(0.01, 0.01) == 0.0

    def test_gender_gap_e_ratio(self):
        assert gender_gap(math.e * 0.02, 0.02) == pytest.approx(1.0, rel=1e-14)

    def test_gender_gap_sign_flips_on_swap(self):
        assert gender_gap(0.03, 0.01) == pytest.approx(-gender_gap(0.01, 0.03), rel=1e-14)

    def test_gender_gap_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            gender_gap(0.0, 0.01)


HMD_DEATHS = """Deaths table
Year Age Female Male Total
1960 0 100.0 150.0 250.0
1960 1 80.0 90.0 170.0
1960 2 60.0 75.0 135.0
1961 0 95.0 140.0 235.0
1961 1 70.0 88.0 158.0
1961 2 55.0 72.0 127.0
1961 110+ 1.0 0.0 1.0
"""

HMD_EXPOSURES = """Exposures table
Year Age Female Male Total
1960 0 10000.0 10500.0 20500.0
1960 1 9900.0 10300.0 20200.0
1960 2 9800.0 10200.0 20000.0
1961 0 10100.0 10600.0 20700.0
1961 1 10000.0 10400.0 20400.0
1961 2 9900.0 0.0 9900.0
1961 110+ 10.0 5.0 15.0
"""


@pytest.fixture
def tables(tmp_path):
    d = tmp_path / "deaths.txt"
    e = tmp_path / "exposures.txt"
    d.write_text(HMD_DEATHS)
    e.write_text(HMD_EXPOSURES)
    return load_mortality_table(d, "deaths"), load_mortality_table(e, "exposures")


class TestMortalityTable:
    def test_wide_format_parsed(self, tables):
        deaths, exposures = tables
        assert deaths.get(1960, 0, "M") == 150.0
        assert deaths.get(1960, 0, "F") == 100.0
        assert exposures.get(1961, 1, "M") == 10400.0

    def test_plus_age_parsed_numerically(self, tables):
        deaths, _ = tables
        assert deaths.get(1961, 110, "F") == 1.0

    def test_comma_delimited_accepted(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("Year,Age,Female,Male\n1970,0,10,12\n")
        t = load_mortality_table(f, "deaths")
        assert t.get(1970, 0, "M") == 12.0

    def test_missing_header_rejected(self, tmp_path):
        f = tmp_path / "d.txt"
        f.write_text("1960 0 1 2 3\n")
        with pytest.raises(IngestionError):
            load_mortality_table(f, "deaths")

    def test_missing_cells_skipped(self, tmp_path):
        f = tmp_path / "d.txt"
        f.write_text("Year Age Female Male\n1960 0 . 5.0\n")
        t = load_mortality_table(f, "deaths")
        assert t.get(1960, 0, "F") is None
        assert t.get(1960, 0, "M") == 5.0


class TestGpSeries:
    def test_single_year_age_order(self, tables):
        deaths, exposures = tables
        gp = build_gp_series(deaths, exposures, ages=(0, 2), years=(1960, 1960))
        assert len(gp.series) == 3
        expected0 = math.log((150.0 / 10500.0) / (100.0 / 10000.0))
        assert gp.series.values[0] == pytest.approx(expected0, rel=1e-14)
        assert gp.series.labels[0] == "1960-0"

    def test_year_major_vs_age_major(self, tables):
        deaths, exposures = tables
        ym = build_gp_series(deaths, exposures, ages=(0, 1), years=(1960, 1961), order="year-major")
        am = build_gp_series(deaths, exposures, ages=(0, 1), years=(1960, 1961), order="age-major")
        # independent reindexing oracle: maps (year, age) to its value
        lookup = dict(zip(ym.cells, ym.series.values))
        expected = [lookup[(y, a)] for a in (0, 1) for y in (1960, 1961)]
        assert np.array_equal(am.series.values, expected)

    def test_exclusions_logged_once_each(self, tables):
        deaths, exposures = tables
        gp = build_gp_series(deaths, exposures, ages=(0, 5), years=(1960, 1961))
        # age 2 of 1961 has zero male exposure; ages 3-5 missing entirely
        assert len(gp.exclusions) == len(set(gp.exclusions))
        assert any("1961 age=2" in x or "year=1961 age=2" in x for x in gp.exclusions)
        assert len(gp.series) + len(gp.exclusions) == 2 * 6

    def test_zero_deaths_cell_excluded_for_log(self, tables):
        # 1961 age 110 has zero male deaths: rate 0 cannot enter the log ratio
        deaths, exposures = tables
        gp = build_gp_series(deaths, exposures, ages=(0, 110), years=(1961, 1961))
        assert any("non-positive rate (M)" in x for x in gp.exclusions)
        assert all(c != (1961, 110) for c in gp.cells)

    def test_empty_result_rejected(self, tables):
        deaths, exposures = tables
        with pytest.raises(IngestionError):
            build_gp_series(deaths, exposures, ages=(50, 60), years=(1960, 1961))

    def test_deterministic(self, tables):
        deaths, exposures = tables
        a = build_gp_series(deaths, exposures, ages=(0, 2), years=(1960, 1961))
        b = build_gp_series(deaths, exposures, ages=(0, 2), years=(1960, 1961))
        assert np.array_equal(a.series.values, b.series.values)
        assert a.exclusions == b.exclusions

    def test_unknown_order_rejected(self, tables):
        deaths, exposures = tables
        with pytest.raises(IngestionError):
            build_gp_series(deaths, exposures, order="diagonal")
