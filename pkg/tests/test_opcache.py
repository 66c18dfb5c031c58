import numpy as np
import pytest

from potlab.games import GameShape
from potlab.hodge import build_operators
from potlab.opcache import (
    FORMAT_VERSION,
    OperatorCache,
    cache_file_name,
    operator_cache_get,
    read_cache_file,
)


def test_cache_file_name_layout():
    assert cache_file_name(GameShape.of((3, 3))) == f"ops_v{FORMAT_VERSION}_2x3-3.bin"
    assert cache_file_name(GameShape.of((2, 2, 2))) == f"ops_v{FORMAT_VERSION}_3x2-2-2.bin"


def test_build_then_memory_hit(tmp_path):
    cache = OperatorCache(tmp_path)
    shape = GameShape.of((2, 3))
    ops1 = cache.get(shape)
    ops2 = cache.get(shape)
    assert ops1 is ops2
    assert cache.builds == 1 and cache.memory_hits == 1 and cache.disk_hits == 0


def test_disk_roundtrip_no_recompute(tmp_path):
    shape = GameShape.of((2, 2, 2))
    first = OperatorCache(tmp_path)
    built = first.get(shape)
    assert first.builds == 1
    assert (tmp_path / cache_file_name(shape)).exists()

    second = OperatorCache(tmp_path)
    loaded = second.get(shape)
    assert second.builds == 0 and second.disk_hits == 1
    assert np.array_equal(loaded.deviation.toarray(), built.deviation.toarray())
    assert np.array_equal(loaded.grad.toarray(), built.grad.toarray())
    assert np.array_equal(loaded.pi_factor, built.pi_factor)


def test_loaded_dense_pi_matches(tmp_path):
    shape = GameShape.of((3, 3))
    OperatorCache(tmp_path).get(shape)
    loaded = OperatorCache(tmp_path).get(shape)
    fresh = build_operators(shape)
    assert np.allclose(loaded.Pi, fresh.Pi, atol=1e-12)


def test_corrupt_file_triggers_rebuild(tmp_path):
    shape = GameShape.of((2, 2))
    OperatorCache(tmp_path).get(shape)
    path = tmp_path / cache_file_name(shape)
    raw = bytearray(path.read_bytes())
    raw[-5] ^= 0xFF  # flip a payload byte; checksum must catch it
    path.write_bytes(bytes(raw))

    cache = OperatorCache(tmp_path)
    with pytest.warns(UserWarning, match="corrupt"):
        ops = cache.get(shape)
    assert cache.builds == 1
    # the rebuilt file was written back and now validates
    assert read_cache_file(path, shape)
    assert np.isfinite(ops.pi_factor).all()


def test_truncated_file_triggers_rebuild(tmp_path):
    shape = GameShape.of((2, 2))
    OperatorCache(tmp_path).get(shape)
    path = tmp_path / cache_file_name(shape)
    path.write_bytes(path.read_bytes()[: 40])
    cache = OperatorCache(tmp_path)
    with pytest.warns(UserWarning, match="corrupt"):
        cache.get(shape)
    assert cache.builds == 1


def test_no_temp_files_left_behind(tmp_path):
    OperatorCache(tmp_path).get(GameShape.of((2, 3)))
    assert [p.name for p in tmp_path.glob("*.tmp")] == []


def test_memory_only_mode():
    cache = OperatorCache(None)
    ops = cache.get(GameShape.of((2, 2)))
    assert ops.num_edges == 4
    assert cache.path_for(GameShape.of((2, 2))) is None


def test_operator_cache_get_convenience(tmp_path):
    ops = operator_cache_get(GameShape.of((2, 2)), tmp_path)
    assert ops.num_edges == 4
    assert (tmp_path / cache_file_name(GameShape.of((2, 2)))).exists()
    # second call loads the persisted file
    again = operator_cache_get(GameShape.of((2, 2)), tmp_path)
    assert np.array_equal(again.pi_factor, ops.pi_factor)
