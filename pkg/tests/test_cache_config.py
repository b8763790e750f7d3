import logging
import threading

import numpy as np
import pytest

from robinscatter.cache import EvaluationCache, cache_key, cache_lookup_or_compute
from robinscatter.config import ConfigError, load_config, parse_complex, parse_points


def counter(value=(0.1 + 0.2j, 1e-13)):
    calls = []

    def compute():
        calls.append(1)
        return value
    return compute, calls


def test_cold_then_warm_is_bit_exact(tmp_path):
    val = (1 / 3 + np.pi * 1j, 2.0 ** -40)
    compute, calls = counter(val)
    key = cache_key(2, 1.0, 1.0, [0.1, 0.2], [0.3, 0.4])
    a = EvaluationCache(tmp_path / "c").lookup_or_compute(key, compute)
    b = EvaluationCache(tmp_path / "c").lookup_or_compute(key, compute)
    assert len(calls) == 1
    assert a == b == val
    line = (tmp_path / "c").read_text().split()
    assert len(line) == 4 and len(line[0]) == 64


def test_disabled_cache_always_computes():
    compute, calls = counter()
    cache = EvaluationCache(None)
    for _ in range(3):
        cache.lookup_or_compute("k" * 64, compute)
    cache_lookup_or_compute("k" * 64, compute, None)
    assert len(calls) == 4


def test_version_bump_changes_key():
    args = (3, 1.0, 0.5j, [0, 0, 1], [1, 0, 1])
    assert cache_key(*args, version=1) != cache_key(*args, version=2)
    assert cache_key(*args) == cache_key(*args)
    assert cache_key(*args) != cache_key(3, 1.0, 0.5j, [0, 0, 1], [1, 0, 1.0000000000000002])


def test_corrupt_file_is_rebuilt(tmp_path, caplog):
    path = tmp_path / "c"
    path.write_text("not a cache record\n")
    compute, calls = counter()
    with caplog.at_level(logging.WARNING):
        EvaluationCache(path).lookup_or_compute("a" * 64, compute)
    assert "corrupt" in caplog.text
    assert len(calls) == 1
    assert path.read_text().startswith("a" * 64)


def test_concurrent_writers_keep_file_consistent(tmp_path):
    cache = EvaluationCache(tmp_path / "c")
    keys = [f"{i:064x}" for i in range(40)]

    def work(offset):
        for k in keys[offset:] + keys[:offset]:
            cache.lookup_or_compute(k, lambda k=k: (complex(int(k, 16)), 0.0))

    threads = [threading.Thread(target=work, args=(i * 7,)) for i in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    lines = (tmp_path / "c").read_text().splitlines()
    assert len(lines) == 40
    fresh = EvaluationCache(tmp_path / "c")
    for k in keys:
        assert fresh.lookup_or_compute(k, lambda: pytest.fail("recomputed"))[0] == int(k, 16)


def test_parsers():
    assert parse_complex("1+2i") == 1 + 2j
    assert parse_complex("0.5 i") == 0.5j
    with pytest.raises(ConfigError):
        parse_complex("abc")
    assert parse_points("0,1; 2,3", 2).shape == (2, 2)
    with pytest.raises(ConfigError):
        parse_points("0,1,2", 2)


def test_config_roundtrip(tmp_path):
    p = tmp_path / "a.ini"
    p.write_text("[medium]\nd = 2\nk = 2\ntheta = 1+0.5i\n[potential]\nrecipe = annulus\nlo = -1, 0.5\n"
                 "hi = 1, 2.5\nn = 4, 4\ncenter = 0, 1.5\ninner = 0.2\nouter = 0.8\nvalue = 1\n")
    cfg = load_config(p)
    assert cfg.medium.k == 2 and cfg.medium.theta == 1 + 0.5j
    pot = cfg.build_potential()
    assert pot.shape == (4, 4) and np.all(pot.q.real >= 4)
    assert load_config(p, dim=3).medium.d == 3
    f = cfg.build_boundary()
    assert f.values.max() == pytest.approx(1.0)


@pytest.mark.parametrize("text", [
    "[medium]\nd = 5\n",
    "[medium]\nk = -1\n",
    "[bogus]\na = 1\n",
    "no sections here\n",
    "[potential]\nrecipe = star\nlo = 0, 1\nhi = 1, 2\nn = 2, 2\n",
    "[potential]\nrecipe = bump\nlo = 0\nhi = 1, 2\nn = 2, 2\ncenter = 0, 1\n",
])
def test_config_errors(tmp_path, text):
    p = tmp_path / "bad.ini"
    p.write_text(text)
    with pytest.raises(ConfigError):
        load_config(p).build_potential()


def test_missing_key_names_section(tmp_path):
    p = tmp_path / "a.ini"
    p.write_text("[potential]\nrecipe = bump\n")
    with pytest.raises(ConfigError, match=r"\[potential\] needs 'lo'"):
        load_config(p).build_potential()
