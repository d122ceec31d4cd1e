"""CSV ingestion rules and result serialization round-trips."""

import numpy as np
import pytest

from mtasa import io as mio
from mtasa.model import STATUS_FILTERED, STATUS_MISSING, STATUS_OK, SimilarityIndexMatrix

from .conftest import write_long_csv


class TestLoadDataset:
    def test_small_file(self, tmp_path):
        path = write_long_csv(
            tmp_path / "data.csv",
            {
                "first": [[1.0, 10.0], [2.0, 20.0], [3.0, 30.0]],
                "second": [[4.0, 40.0], [5.0, 50.0], [6.0, 60.0]],
            },
            ["u", "v"],
        )
        ds = mio.load_dataset(path, ["u", "v"])
        assert ds.instance_ids == ("first", "second")
        assert ds.values.shape == (2, 3, 2)
        assert ds.values[1, 2, 1] == 60.0

    def test_instances_keep_first_appearance_order(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text(
            "instance_id,time_index,v\n"
            "zebra,0,1\nzebra,1,2\n"
            "ant,0,3\nant,1,4\n",
            encoding="utf-8",
        )
        ds = mio.load_dataset(path, ["v"])
        assert ds.instance_ids == ("zebra", "ant")

    def test_empty_and_na_cells_become_missing(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text(
            "instance_id,time_index,u,v\n"
            "a,0,1.0,NA\n"
            "a,1,,2.0\n",
            encoding="utf-8",
        )
        ds = mio.load_dataset(path, ["u", "v"])
        assert np.isnan(ds.values[0, 0, 1])
        assert np.isnan(ds.values[0, 1, 0])

    def test_absent_rows_become_missing_cells(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text(
            "instance_id,time_index,v\n"
            "a,0,1\na,2,3\n"  # t=1 never appears
            "b,0,1\nb,1,2\nb,2,3\n",
            encoding="utf-8",
        )
        ds = mio.load_dataset(path, ["v"])
        assert np.isnan(ds.values[0, 1, 0])

    def test_ragged_time_axes_rejected_listing_ids(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text(
            "instance_id,time_index,v\n"
            "long,0,1\nlong,1,2\nlong,2,3\n"
            "short,0,1\nshort,1,2\n",
            encoding="utf-8",
        )
        with pytest.raises(mio.DataFormatError, match="short"):
            mio.load_dataset(path, ["v"])

    def test_unknown_variable_column_rejected(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text(
            "instance_id,time_index,v,extra\na,0,1,2\na,1,1,2\n",
            encoding="utf-8",
        )
        with pytest.raises(mio.DataFormatError, match="extra"):
            mio.load_dataset(path, ["v"])

    def test_missing_variable_column_rejected(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text(
            "instance_id,time_index,u\na,0,1\na,1,1\n", encoding="utf-8"
        )
        with pytest.raises(mio.DataFormatError, match="v"):
            mio.load_dataset(path, ["u", "v"])

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("", encoding="utf-8")
        with pytest.raises(mio.DataFormatError, match="empty"):
            mio.load_dataset(path, ["v"])

    def test_header_only_rejected(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("instance_id,time_index,v\n", encoding="utf-8")
        with pytest.raises(mio.DataFormatError, match="no data rows"):
            mio.load_dataset(path, ["v"])

    def test_duplicate_time_row_rejected(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text(
            "instance_id,time_index,v\na,0,1\na,0,2\na,1,3\n",
            encoding="utf-8",
        )
        with pytest.raises(mio.DataFormatError, match="duplicate"):
            mio.load_dataset(path, ["v"])

    def test_non_numeric_value_rejected(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text(
            "instance_id,time_index,v\na,0,oops\na,1,2\n", encoding="utf-8"
        )
        with pytest.raises(mio.DataFormatError, match="not a number"):
            mio.load_dataset(path, ["v"])

    def test_columns_mapped_by_name_not_position(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text(
            "instance_id,time_index,v,u\na,0,10,1\na,1,20,2\n",
            encoding="utf-8",
        )
        ds = mio.load_dataset(path, ["u", "v"])
        assert ds.values[0, 0, 0] == 1.0  # u
        assert ds.values[0, 0, 1] == 10.0  # v


class TestLoadQuery:
    def test_round_trip(self, tmp_path, rng):
        values = rng.normal(size=(4, 2))
        path = write_long_csv(tmp_path / "q.csv", {"q": values}, ["u", "v"])
        query = mio.load_query(path, ["u", "v"])
        np.testing.assert_allclose(query.values, values, atol=1e-12)

    def test_multiple_instances_rejected(self, tmp_path):
        path = write_long_csv(
            tmp_path / "q.csv",
            {"a": [[1.0], [2.0]], "b": [[3.0], [4.0]]},
            ["v"],
        )
        with pytest.raises(mio.DataFormatError, match="exactly one"):
            mio.load_query(path, ["v"])

    def test_query_with_gap_rejected(self, tmp_path):
        path = tmp_path / "q.csv"
        path.write_text(
            "instance_id,time_index,v\nq,0,1\nq,2,3\n", encoding="utf-8"
        )
        with pytest.raises(mio.DataFormatError, match="missing"):
            mio.load_query(path, ["v"])


class TestResultsRoundTrip:
    def build_matrix(self):
        return SimilarityIndexMatrix(
            rotation_array=np.array([3, 0, -1, 7]),
            similarity_array=np.array([0.123456789012, 1.0, np.nan, np.nan]),
            raw_combined=np.array([0.876543210988, 0.0, np.nan, 0.42]),
            status=(STATUS_OK, STATUS_OK, STATUS_MISSING, STATUS_FILTERED),
            instance_ids=("alpha", "beta", "gamma", "delta"),
        )

    def test_written_fields(self, tmp_path):
        path = tmp_path / "out.csv"
        mio.write_results(self.build_matrix(), path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "instance_id,rotation,similarity,raw_distance,status"
        assert lines[1] == "alpha,3,0.123456789012,0.876543210988,ok"
        assert lines[2] == "beta,0,1,0,ok"
        # missing: everything blank
        assert lines[3] == "gamma,,,,missing_data"
        # filtered: rotation kept, similarity and raw blanked
        assert lines[4] == "delta,7,,,filtered"

    def test_round_trip_reconstructs_matrix(self, tmp_path):
        path = tmp_path / "out.csv"
        original = self.build_matrix()
        mio.write_results(original, path)
        loaded = mio.load_results(path)
        assert loaded.instance_ids == original.instance_ids
        assert loaded.status == original.status
        np.testing.assert_array_equal(loaded.rotation_array, original.rotation_array)
        np.testing.assert_allclose(
            loaded.similarity_array[:2], original.similarity_array[:2], rtol=1e-11
        )
        assert np.isnan(loaded.similarity_array[2:]).all()

    def test_write_is_deterministic(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        mio.write_results(self.build_matrix(), a)
        mio.write_results(self.build_matrix(), b)
        assert a.read_bytes() == b.read_bytes()


class TestConfigFile:
    def test_parses_keys_and_skips_comments(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(
            "# assessment setup\n"
            "\n"
            "weights = 0.5,0.5\n"
            "top-k = 10\n"
            "workers=2\n",
            encoding="utf-8",
        )
        options = mio.parse_config_file(path)
        assert options == {"weights": "0.5,0.5", "top_k": "10", "workers": "2"}

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("speed = 11\n", encoding="utf-8")
        with pytest.raises(mio.DataFormatError, match="unknown key"):
            mio.parse_config_file(path)

    def test_missing_equals_rejected(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("weights\n", encoding="utf-8")
        with pytest.raises(mio.DataFormatError, match="key = value"):
            mio.parse_config_file(path)
