import numpy as np
import pytest

from bigjump.streams import chunk_sizes, run_chunks, spawn, stream_key, substream, tree_sum


def test_same_path_reproduces():
    a = substream(42, "scan", "n=5").random(8)
    b = substream(42, "scan", "n=5").random(8)
    assert np.array_equal(a, b)


def test_distinct_paths_differ():
    a = substream(42, "scan", "n=5").random(8)
    b = substream(42, "scan", "n=6").random(8)
    c = substream(43, "scan", "n=5").random(8)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_stream_key_is_stable():
    assert stream_key(1, "a", "b") == stream_key(1, "a", "b")
    assert stream_key(1, "a") != stream_key(1, "b")


def test_spawn_does_not_advance_parent():
    parent = substream(7, "x")
    spawn(parent, 0).random(4)
    spawn(parent, 1).random(4)
    fresh = substream(7, "x")
    assert np.array_equal(parent.random(4), fresh.random(4))


def test_spawn_streams_are_disjoint():
    parent = substream(7, "x")
    a = spawn(parent, 0).random(4)
    b = spawn(parent, 1).random(4)
    assert not np.array_equal(a, b)


def test_chunk_sizes_partition():
    sizes = chunk_sizes(1_000_003, 64)
    assert sum(sizes) == 1_000_003
    assert max(sizes) - min(sizes) <= 1
    assert chunk_sizes(10, 64) == [1] * 10


@pytest.mark.parametrize("threads", [1, 2, 8])
def test_run_chunks_thread_invariant(threads):
    def worker(i, size, rng):
        return rng.random(3).sum() + size

    base = run_chunks(worker, 10_000, substream(5, "w"), threads=1)
    other = run_chunks(worker, 10_000, substream(5, "w"), threads=threads)
    assert base == other


def test_tree_sum_matches_plain_sum_exactly_for_ints():
    vals = list(range(101))
    assert tree_sum(vals) == sum(vals)


def test_tree_sum_deterministic_for_arrays():
    rng = substream(1, "t")
    arrays = [rng.random(4) for _ in range(17)]
    assert np.array_equal(tree_sum(arrays), tree_sum(list(arrays)))
