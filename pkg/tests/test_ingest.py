import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from clustervar.core.errors import DataError
from clustervar.models.experiment import CsvSchema, DataSource, Frequency
from clustervar.models.panel import TimeSeriesPanel, TransformKind, TransformSpec
from clustervar.services.ingest import (
    expand_plan,
    load_csv_panel,
    load_source,
    run_pipeline,
    source_plan,
    transform_holdout,
    transform_split,
)

DIFFERENCE = TransformSpec(kind=TransformKind.DIFFERENCE)
ZSCORE = TransformSpec(kind=TransformKind.ZSCORE)


@pytest.fixture
def write_csv(tmp_path):
    def write(text, name="panel.csv"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return write


class TestLoadCsvPanel:
    def test_well_formed(self, write_csv):
        path = write_csv("date,a,b\n2020-01-01,1,10\n2020-01-02,2,20\n2020-01-03,3,30\n")
        panel = load_csv_panel(path)
        assert panel.names == ("a", "b")
        assert_array_equal(panel.values, [[1, 10], [2, 20], [3, 30]])

    def test_blank_cell_names_row_and_column(self, write_csv):
        path = write_csv("date,a,b\n2020-01-01,1,10\n2020-01-02,,20\n2020-01-03,3,30\n")
        with pytest.raises(DataError, match=r"row 2, column 'a'"):
            load_csv_panel(path)

    def test_non_numeric_cell(self, write_csv):
        path = write_csv("date,a\n2020-01-01,1\n2020-01-02,abc\n")
        with pytest.raises(DataError, match="non-numeric"):
            load_csv_panel(path)

    def test_out_of_order_dates(self, write_csv):
        path = write_csv("date,a\n2020-01-02,1\n2020-01-01,2\n2020-01-03,3\n")
        with pytest.raises(DataError, match="out of order"):
            load_csv_panel(path)

    def test_duplicate_dates(self, write_csv):
        path = write_csv("date,a\n2020-01-01,1\n2020-01-01,2\n")
        with pytest.raises(DataError, match="duplicate"):
            load_csv_panel(path)

    def test_daily_gap(self, write_csv):
        path = write_csv("date,a\n2020-01-01,1\n2020-01-02,2\n2020-01-05,3\n")
        with pytest.raises(DataError, match="gap"):
            load_csv_panel(path, CsvSchema(frequency=Frequency.DAILY))
        assert load_csv_panel(path).n_obs == 3

    def test_quarterly_sequence(self, write_csv):
        path = write_csv("date,a\n2019-10-01,1\n2020-01-01,2\n2020-04-01,3\n")
        assert load_csv_panel(path, CsvSchema(frequency=Frequency.QUARTERLY)).n_obs == 3

    def test_selected_series_and_delimiter(self, write_csv):
        path = write_csv("a;b;c\n1;2;3\n4;5;6\n")
        panel = load_csv_panel(path, CsvSchema(date_column=None, series=["c", "a"], delimiter=";"))
        assert panel.names == ("c", "a")
        assert_array_equal(panel.values, [[3, 1], [6, 4]])

    def test_missing_column(self, write_csv):
        path = write_csv("date,a\n2020-01-01,1\n")
        with pytest.raises(DataError, match="missing"):
            load_csv_panel(path, CsvSchema(series=["b"]))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_csv_panel(tmp_path / "absent.csv")

    def test_load_source(self, write_csv):
        path = write_csv("x,y\n1,2\n3,4\n")
        source = DataSource(path=path, csv=CsvSchema(date_column=None))
        assert load_source(source).n_series == 2


class TestPipeline:
    def test_difference_then_zscore(self):
        panel = TimeSeriesPanel.from_array([1.0, 3.0, 6.0])
        out = run_pipeline(panel, [DIFFERENCE, ZSCORE])
        assert_allclose(out.values[:, 0], [-1, 1])
        stats = out.transform_log[-1].stats["y1"]
        assert stats.mean == pytest.approx(2.5)

    def test_empty_plan_is_identity(self, rng):
        panel = TimeSeriesPanel.from_array(rng.normal(size=(5, 2)))
        assert run_pipeline(panel, []) is panel

    def test_log_of_zero_rejected(self):
        panel = TimeSeriesPanel.from_array([1.0, 0.0, 2.0])
        with pytest.raises(DataError):
            run_pipeline(panel, [TransformSpec(kind=TransformKind.LOG_YOY_GROWTH, period=1)])

    def test_per_series_map(self):
        panel = TimeSeriesPanel.from_array([[1.0, math.e], [3.0, math.e ** 2], [6.0, math.e ** 4]], ["a", "b"])
        out = run_pipeline(panel, {"a": [DIFFERENCE], "b": [TransformSpec(kind=TransformKind.LOG_DIFFERENCE)]})
        assert_allclose(out.values, [[2, 1], [3, 2]])

    def test_expand_plan_targets_series(self):
        specs = expand_plan({"a": [DIFFERENCE, ZSCORE]})
        assert [spec.series for spec in specs] == [["a"], ["a"]]

    def test_source_plan_order(self, tmp_path):
        source = DataSource(path=tmp_path / "x.csv", transforms=[DIFFERENCE], transform_map={"a": [ZSCORE]})
        assert [spec.kind for spec in source_plan(source)] == [TransformKind.DIFFERENCE, TransformKind.ZSCORE]


class TestTransformSplit:
    def test_holdout_uses_training_statistics(self, rng):
        raw = TimeSeriesPanel.from_array(np.cumsum(rng.normal(size=(40, 2)), axis=0))
        train, holdout = transform_split(raw, [DIFFERENCE, ZSCORE], n_holdout=10)
        assert train.n_obs == 29
        assert holdout.n_obs == 10
        assert_allclose(train.values.mean(axis=0), 0.0, atol=1e-10)
        assert_allclose(train.values.std(axis=0), 1.0, atol=1e-10)

        stats = train.transform_log[-1].stats
        diffs = np.diff(raw.values, axis=0)[-10:]
        expected = (diffs - [stats["y1"].mean, stats["y2"].mean]) / [stats["y1"].sd, stats["y2"].sd]
        assert_allclose(holdout.values, expected)

    def test_transform_holdout_matches_split(self, rng):
        raw = TimeSeriesPanel.from_array(np.exp(rng.normal(size=(30, 2)).cumsum(axis=0) * 0.1))
        plan = [TransformSpec(kind=TransformKind.LOG_YOY_GROWTH, period=4), ZSCORE]
        train, holdout = transform_split(raw, plan, n_holdout=6)
        again = transform_holdout(raw.rows(None, 24), raw.rows(24, None), train.transform_log)
        assert_allclose(again.values, holdout.values)

    def test_transform_holdout_needs_context(self, rng):
        raw = TimeSeriesPanel.from_array(rng.normal(size=(10, 1)))
        log = run_pipeline(raw, [TransformSpec(kind=TransformKind.DIFFERENCE, period=3)]).transform_log
        with pytest.raises(DataError):
            transform_holdout(raw.rows(None, 1), raw.rows(8, None), log)
