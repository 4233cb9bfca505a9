import math

import numpy as np
import pytest
import torch
from hypothesis import given
from hypothesis import strategies as st

from specadapt.corpusio import ReferenceDistribution
from specadapt.exceptions import DimensionMismatch, EmptyBatch, InsufficientBatch
from specadapt.losses import (
    SIGMA_FLOOR,
    BatchPosteriorStats,
    consistency_loss,
    kl_reg_loss,
    meanstd_reg_loss,
    posterior_stats,
    supervised_loss,
    total_loss,
)

REF = ReferenceDistribution()


def stats(mu, sigma, n=32):
    return BatchPosteriorStats(torch.tensor(mu, dtype=torch.float64),
                               torch.tensor(sigma, dtype=torch.float64), n)


class TestConsistency:
    def test_examples(self):
        assert consistency_loss([0.2, 0.7], [0.2, 0.7]).item() == 0
        assert consistency_loss([0.3], [0.5]).item() == pytest.approx(0.04, abs=1e-15)
        assert consistency_loss([0.0, 1.0], [1.0, 0.0]).item() == 1.0

    def test_errors(self):
        with pytest.raises(DimensionMismatch):
            consistency_loss([0.1, 0.2], [0.1])
        with pytest.raises(EmptyBatch):
            consistency_loss([], [])


class TestSupervised:
    def test_examples(self):
        assert supervised_loss([0.5], [1]).item() == pytest.approx(math.log(2), abs=1e-15)
        assert supervised_loss([0.9], [0]).item() == pytest.approx(-math.log(0.1), abs=1e-12)
        assert supervised_loss([1.0, 0.0], [1, 0]).item() == pytest.approx(0.0, abs=1e-12)

    def test_log_clamp_keeps_it_finite(self):
        assert supervised_loss([0.0], [1]).item() == pytest.approx(-math.log(1e-12))

    def test_empty(self):
        with pytest.raises(EmptyBatch):
            supervised_loss([], [])


class TestPosteriorStats:
    def test_unbiased(self):
        s = posterior_stats([0.1, 0.3, 0.8])
        assert s.mu_p.item() == pytest.approx(0.4)
        assert s.sigma_p.item() == pytest.approx(np.std([0.1, 0.3, 0.8], ddof=1))

    def test_floor(self):
        assert posterior_stats([0.5, 0.5, 0.5]).sigma_p.item() == pytest.approx(SIGMA_FLOOR)

    def test_needs_two(self):
        with pytest.raises(InsufficientBatch):
            posterior_stats([0.4])
        with pytest.raises(InsufficientBatch):
            kl_reg_loss(stats(0.4, 0.2, n=1))


class TestKL:
    def test_zero_at_reference(self):
        assert kl_reg_loss(stats(0.417, 0.227), REF).item() == pytest.approx(0.0, abs=1e-15)

    def test_worked_value(self):
        expected = (math.log(0.1 / 0.227) + (0.227**2 + 0.083**2) / (2 * 0.01) - 0.5)
        assert kl_reg_loss(stats(0.5, 0.1), REF).item() == pytest.approx(expected, abs=1e-12)
        assert kl_reg_loss(stats(0.5, 0.1), REF).item() == pytest.approx(1.6011, abs=1e-4)

    @given(st.floats(0.0, 1.0), st.floats(1e-3, 1.0))
    def test_nonnegative(self, mu, sigma):
        assert kl_reg_loss(stats(mu, sigma), REF).item() >= -1e-12


class TestMeanStd:
    def test_examples(self):
        assert meanstd_reg_loss(stats(0.417, 0.227), REF).item() == pytest.approx(0, abs=1e-15)
        assert meanstd_reg_loss(stats(0.5, 0.1), REF, 1.0).item() == pytest.approx(0.210)
        assert meanstd_reg_loss(stats(0.5, 0.1), REF, 0.0).item() == pytest.approx(0.127)


def test_total_loss():
    assert total_loss(0.7, 1e-4, 0.01, 1000, 100) == pytest.approx(1.8)
    assert total_loss(0.7, 5.0, 3.0, 0, 0) == 0.7
    assert total_loss(0, 0, 0, 1000, 100) == 0


def _fd(fn, x, eps=1e-6):
    g = np.zeros_like(x)
    for i in range(x.size):
        up, down = x.copy(), x.copy()
        up[i] += eps
        down[i] -= eps
        g[i] = (fn(up) - fn(down)) / (2 * eps)
    return g


@pytest.mark.parametrize("name", ["consistency", "kl", "meanstd"])
@pytest.mark.parametrize("seed", range(3))
def test_gradients_wrt_predictions(name, seed):
    rng = np.random.default_rng(seed)
    p = rng.uniform(0.05, 0.95, 12)
    t = rng.uniform(0.05, 0.95, 12)
    fns = {
        "consistency": lambda x: consistency_loss(x, torch.as_tensor(t)),
        "kl": lambda x: kl_reg_loss(x, REF),
        "meanstd": lambda x: meanstd_reg_loss(x, REF, 1.0),
    }
    fn = fns[name]
    x = torch.tensor(p, requires_grad=True)
    (g,) = torch.autograd.grad(fn(x), x)
    num = _fd(lambda v: fn(torch.as_tensor(v)).item(), p)
    np.testing.assert_allclose(g.numpy(), num, rtol=1e-4, atol=1e-9)
