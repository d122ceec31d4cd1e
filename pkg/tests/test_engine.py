"""Pipeline orchestration: partitioning, parallel determinism, semantics."""

import numpy as np
import pytest

from mtasa import engine
from mtasa.model import (
    STATUS_MISSING,
    STATUS_OK,
    Filtering,
    QuerySequence,
    TimeSeriesDataset,
    ValidationError,
)

from .conftest import make_config


def build_inputs(values, query_values, variable_names, **config_overrides):
    k, n, _ = values.shape
    dataset = TimeSeriesDataset(
        values=values,
        instance_ids=tuple(f"i{j}" for j in range(k)),
        variable_names=variable_names,
    )
    query = QuerySequence(values=query_values, variable_names=variable_names)
    config = make_config(n, variable_names, **config_overrides)
    return dataset, query, config


class TestPartitionTasks:
    def test_near_equal_contiguous_chunks(self):
        plan = engine.partition_tasks(np.arange(10), 3)
        sizes = [c.size for c in plan.chunks]
        assert sizes == [4, 3, 3]
        np.testing.assert_array_equal(np.concatenate(plan.chunks), np.arange(10))

    def test_more_workers_than_tasks_gives_singletons(self):
        plan = engine.partition_tasks(np.arange(3), 8)
        assert [c.size for c in plan.chunks] == [1, 1, 1]

    def test_empty_task_list(self):
        plan = engine.partition_tasks(np.array([], dtype=int), 4)
        assert plan.chunks == ()
        assert plan.n_tasks == 0

    def test_single_worker_takes_everything(self):
        plan = engine.partition_tasks(np.arange(7), 1)
        assert [c.size for c in plan.chunks] == [7]

    def test_preserves_arbitrary_index_order(self):
        indices = np.array([9, 4, 7, 0])
        plan = engine.partition_tasks(indices, 2)
        np.testing.assert_array_equal(np.concatenate(plan.chunks), indices)

    def test_rejects_bad_worker_count(self):
        with pytest.raises(ValueError):
            engine.partition_tasks(np.arange(3), 0)


class TestResolveWorkerCount:
    def test_auto_uses_cpu_count(self):
        import os

        assert engine.resolve_worker_count("auto") == (os.cpu_count() or 1)

    def test_explicit_passthrough(self):
        assert engine.resolve_worker_count(3) == 3


class TestRunPipelineSemantics:
    def test_single_identical_instance_scores_one(self, rng):
        query = rng.normal(size=(6, 2))
        dataset, q, config = build_inputs(query[None], query, ("a", "b"))
        result = engine.run_pipeline(dataset, q, config)
        assert result.rotation_array[0] == 0
        assert result.similarity_array[0] == 1.0
        assert result.status == (STATUS_OK,)

    def test_planted_delays_recovered_and_scored_one(self, rng):
        query = rng.normal(size=(8, 3))
        values = np.stack([np.roll(query, d, axis=0) for d in range(8)])
        dataset, q, config = build_inputs(values, query, ("a", "b", "c"))
        result = engine.run_pipeline(dataset, q, config)
        np.testing.assert_array_equal(result.rotation_array, np.arange(8))
        np.testing.assert_allclose(result.similarity_array, 1.0, atol=1e-9)

    def test_rotation_off_reports_zero_rotations(self, rng):
        query = rng.normal(size=(5, 1))
        values = rng.normal(size=(4, 5, 1))
        dataset, q, config = build_inputs(
            values, query, ("a",), rotation_mode=False
        )
        result = engine.run_pipeline(dataset, q, config)
        np.testing.assert_array_equal(result.rotation_array, np.zeros(4))

    def test_rotation_off_distances_are_unaligned(self, rng):
        query = rng.normal(size=(6, 1))
        shifted = np.roll(query, 2, axis=0)
        values = np.stack([query, shifted])
        dataset, q, config = build_inputs(
            values, query, ("a",), rotation_mode=False
        )
        result = engine.run_pipeline(dataset, q, config)
        # without rotation the shifted copy is *not* recognized as the query
        assert result.similarity_array[0] == pytest.approx(1.0)
        assert result.similarity_array[1] == pytest.approx(0.0)

    def test_missing_instances_marked_and_skipped(self, rng):
        query = rng.normal(size=(5, 2))
        values = np.stack([query, query, query])
        values[1, 3, 0] = np.nan
        dataset, q, config = build_inputs(values, query, ("a", "b"))
        result = engine.run_pipeline(dataset, q, config)
        assert result.status[1] == STATUS_MISSING
        assert result.rotation_array[1] == -1
        assert np.isnan(result.similarity_array[1])
        assert np.isnan(result.raw_combined[1])
        assert result.status[0] == result.status[2] == STATUS_OK

    def test_all_instances_missing_warns(self):
        values = np.full((2, 4, 1), np.nan)
        query_values = np.ones((4, 1))
        dataset, q, config = build_inputs(values, query_values, ("a",))
        with pytest.warns(UserWarning, match="missing_data"):
            result = engine.run_pipeline(dataset, q, config)
        assert set(result.status) == {STATUS_MISSING}

    def test_validation_errors_propagate(self, rng):
        query = rng.normal(size=(4, 1))
        values = rng.normal(size=(2, 4, 1))
        dataset, q, _ = build_inputs(values, query, ("a",))
        bad_config = make_config(4, ("a",), period=[0, 9])
        with pytest.raises(ValidationError):
            engine.run_pipeline(dataset, q, bad_config)

    def test_relative_filtering_end_to_end(self, rng):
        query = rng.normal(size=(6, 1))
        values = np.stack(
            [query, query + 0.01, query + 5.0, query + 10.0]
        )
        dataset, q, config = build_inputs(
            values, query, ("a",), filtering=Filtering.relative(2)
        )
        result = engine.run_pipeline(dataset, q, config)
        assert result.status[0] == STATUS_OK
        assert result.status[1] == STATUS_OK
        assert result.status[2] == "filtered"
        assert result.status[3] == "filtered"
        # raw combined stays available even for filtered instances
        assert not np.isnan(result.raw_combined[2])

    def test_subsequence_mode_runs(self, rng):
        query = rng.normal(size=(10, 2))
        values = np.stack([np.roll(query, 4, axis=0), rng.normal(size=(10, 2))])
        dataset, q, config = build_inputs(
            values, query, ("a", "b"), period=[2, 3, 4]
        )
        result = engine.run_pipeline(dataset, q, config)
        assert result.status == (STATUS_OK, STATUS_OK)

    def test_dtw_distance_mode_runs(self, rng):
        query = rng.normal(size=(6, 1))
        values = rng.normal(size=(3, 6, 1))
        dataset, q, config = build_inputs(
            values, query, ("a",), rotation_mode=False, distance_kind="dtw"
        )
        result = engine.run_pipeline(dataset, q, config)
        assert result.status == (STATUS_OK,) * 3

    def test_instance_order_is_preserved(self, rng):
        query = rng.normal(size=(5, 1))
        values = rng.normal(size=(6, 5, 1))
        dataset, q, config = build_inputs(values, query, ("a",))
        result = engine.run_pipeline(dataset, q, config)
        assert result.instance_ids == tuple(f"i{j}" for j in range(6))


class TestParallelDeterminism:
    def fingerprint(self, result):
        return (
            result.rotation_array.tobytes(),
            result.similarity_array.tobytes(),
            result.raw_combined.tobytes(),
            result.status,
        )

    def test_worker_counts_agree_bitwise(self, rng):
        query = rng.normal(size=(12, 3))
        values = rng.normal(size=(40, 12, 3))
        values[5, 0, 0] = np.nan  # one missing instance in the mix
        for workers in (1, 2, 3, 5):
            dataset, q, config = build_inputs(
                values, query, ("a", "b", "c"), worker_count=workers
            )
            result = engine.run_pipeline(dataset, q, config)
            if workers == 1:
                reference = self.fingerprint(result)
            else:
                assert self.fingerprint(result) == reference

    def test_more_workers_than_instances(self, rng):
        query = rng.normal(size=(6, 1))
        values = rng.normal(size=(3, 6, 1))
        dataset, q, config = build_inputs(
            values, query, ("a",), worker_count=8
        )
        one = build_inputs(values, query, ("a",), worker_count=1)
        assert self.fingerprint(engine.run_pipeline(dataset, q, config)) == (
            self.fingerprint(engine.run_pipeline(*one))
        )

    def test_context_is_cleaned_up(self, rng):
        query = rng.normal(size=(4, 1))
        values = rng.normal(size=(2, 4, 1))
        dataset, q, config = build_inputs(values, query, ("a",))
        engine.run_pipeline(dataset, q, config)
        assert engine._WORKER_CTX is None
