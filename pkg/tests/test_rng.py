import numpy as np
import pytest

from macrobell import rng
from macrobell.errors import DomainError


def test_block_is_pure_function_of_offset():
    s = rng.SeededStream(7)
    whole = s.block(0, 100)
    assert np.array_equal(whole[40:60], s.block(40, 20))
    assert np.array_equal(whole[99], s.trial(99))


def test_domains_and_seeds_differ():
    a = rng.SeededStream(7, rng.ENSEMBLE_DOMAIN).block(0, 4)
    b = rng.SeededStream(7, rng.SETTINGS_DOMAIN).block(0, 4)
    c = rng.SeededStream(8, rng.ENSEMBLE_DOMAIN).block(0, 4)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_redraw_attempts_do_not_collide_with_main_sequence():
    s = rng.SeededStream(3)
    main = s.block(0, 1000)
    retry = s.trial(5, attempt=1)
    assert not (main == retry).all(axis=1).any()


def test_next_block_advances_cursor():
    s = rng.SeededStream(1)
    start, first = s.next_block(3)
    start2, second = s.next_block(2)
    assert (start, start2, s.position) == (0, 3, 5)
    assert np.array_equal(np.vstack([first, second]), s.block(0, 5))


@pytest.mark.parametrize("seed", [-1, 1 << 64])
def test_seed_range(seed):
    with pytest.raises(DomainError):
        rng.SeededStream(seed)


def test_unit_interval_bounds():
    words = np.array([0, (1 << 64) - 1], dtype=np.uint64)
    u = rng.to_unit_interval(words)
    assert u[0] > 0.0
    assert u[1] == 1.0


@pytest.mark.parametrize("workers", [1, 2, 4, 8])
def test_chunked_is_independent_of_workers(workers):
    s = rng.SeededStream(11)
    total = 3 * rng.CHUNK + 17
    out = rng.chunked(total, lambda start, count: s.block(start, count)[:, 0], workers)
    assert np.array_equal(out, s.block(0, total)[:, 0])


def test_chunked_empty():
    s = rng.SeededStream(11)
    assert rng.chunked(0, lambda start, count: s.block(start, count)).shape == (0, 4)
