from __future__ import annotations

import math

from hypothesis import given, strategies as st

from dualcert import configs as cfg


def test_config_examples():
    assert cfg.config_of(((0, 0, 0),)) == (3, 0)
    assert cfg.class_size((3, 0)) == 1
    assert cfg.config_of(((1, 1, 0, 0),)) == (2, 2)
    assert cfg.class_size((2, 2)) == 6
    g = cfg.config_of(((0, 1, 1), (0, 0, 1)))
    assert sorted(g) == [0, 1, 1, 1] and cfg.class_size(g) == 6


def test_all_configs_start_at_zero():
    configs = cfg.all_configs(2, 3)
    assert configs[0] == (3, 0, 0, 0)
    assert len(configs) == math.comb(3 + 3, 3) == cfg.num_configs(2, 3)


@given(st.integers(1, 2), st.integers(1, 6))
def test_class_sizes_cover_the_space(ell, n):
    assert sum(cfg.class_size(g) for g in cfg.all_configs(ell, n)) == 2 ** (ell * n)
    assert all(sum(g) == n for g in cfg.all_configs(ell, n))


@given(st.integers(1, 2), st.integers(1, 5))
def test_representative_has_its_configuration(ell, n):
    for g in cfg.all_configs(ell, n):
        assert cfg.config_of(cfg.representative(g, ell)) == g


def test_dense_config_index_matches_config_of():
    ell, n = 2, 3
    idx = cfg.dense_config_index(ell, n, 2)
    configs = cfg.all_configs(ell, n)
    digits = cfg.dense_digits(ell, n, 2)
    for p in range(2 ** (ell * n)):
        X = tuple(tuple(int(x) for x in row) for row in digits[p])
        assert configs[idx[p]] == cfg.config_of(X)
