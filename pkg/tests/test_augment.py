import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specadapt.augment import NoiseConfig, augment, plan_perturbation


def sample(length=20, dim=5, seed=0):
    rng = np.random.default_rng(seed)
    return rng.normal(size=(length, dim)), rng.normal(size=14)


def test_zero_noise_is_identity():
    emb, feats = sample()
    out, f = augment(emb, feats, NoiseConfig.zero(), np.random.default_rng(0))
    assert np.array_equal(out, emb) and np.array_equal(f, feats)


def test_inputs_not_mutated():
    emb, feats = sample()
    e0, f0 = emb.copy(), feats.copy()
    augment(emb, feats, NoiseConfig(), np.random.default_rng(0))
    assert np.array_equal(emb, e0) and np.array_equal(feats, f0)


def test_single_token_survives_certain_drop():
    cfg = NoiseConfig(word_drop_prob=1.0, target_perturb_fraction=1.0)
    emb, feats = sample(length=1)
    for seed in range(20):
        out, _ = augment(emb, feats, cfg, np.random.default_rng(seed))
        assert out.shape == (1, 5)


def test_all_drop_keeps_exactly_one():
    cfg = NoiseConfig(word_drop_prob=1.0, target_perturb_fraction=1.0)
    out, _ = augment(*sample(length=8), cfg, np.random.default_rng(3))
    assert out.shape[0] == 1


def test_zero_vector_substitution():
    cfg = NoiseConfig(emb_gauss_std=0.0, feat_gauss_std=0.0, word_drop_prob=0.0,
                      word_subst_prob=1.0, subst_mode="zero_vector", target_perturb_fraction=1.0)
    out, _ = augment(*sample(), cfg, np.random.default_rng(0))
    assert np.all(out == 0)


def test_plan_masks_are_exclusive():
    plan = plan_perturbation(50, NoiseConfig(), np.random.default_rng(0))
    total = plan.drop.astype(int) + plan.substitute + plan.jitter
    assert np.array_equal(total > 0, plan.eligible)
    assert total.max() <= 1


@settings(max_examples=50)
@given(st.integers(1, 40), st.integers(0, 2**32 - 1), st.floats(0, 1), st.floats(0, 1))
def test_length_bounds(length, seed, p_drop, frac):
    cfg = NoiseConfig(word_drop_prob=p_drop, target_perturb_fraction=frac)
    out, f = augment(np.ones((length, 3)), np.zeros(14), cfg, np.random.default_rng(seed))
    assert 1 <= out.shape[0] <= length
    assert f.shape == (14,)


def test_independent_streams_differ():
    emb, feats = sample()
    same = 0
    for k in range(200):
        a, _ = augment(emb, feats, NoiseConfig(), np.random.default_rng([k, 0]))
        b, _ = augment(emb, feats, NoiseConfig(), np.random.default_rng([k, 1]))
        same += a.shape == b.shape and np.array_equal(a, b)
    assert same == 0


def test_modified_fraction_near_half():
    cfg = NoiseConfig()
    rng = np.random.default_rng(11)
    fracs = [plan_perturbation(20, cfg, rng).eligible.mean() for _ in range(10_000)]
    assert abs(np.mean(fracs) - 0.5) < 0.03


@pytest.mark.parametrize("bad", [dict(word_drop_prob=1.5), dict(emb_gauss_std=-1),
                                 dict(subst_mode="mystery")])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        NoiseConfig(**bad)
