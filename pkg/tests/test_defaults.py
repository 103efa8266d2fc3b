import math

import numpy as np
import pytest

from pchnet.network import NetworkSpec, sample_capacities
from pchnet.placement import MGMT_PER_HOP, SYNC_CONST_PER_HOP, SYNC_PER_HOP
from pchnet.simulator import SimConfig


def test_simulation_defaults():
    cfg = SimConfig()
    assert (cfg.min_tu, cfg.max_tu, cfg.k, cfg.timeout) == (1.0, 4.0, 5, 3.0)
    assert (cfg.queue_limit, cfg.beta, cfg.gamma) == (8000.0, 10.0, 0.1)
    assert (cfg.tau, cfg.mark_threshold) == (0.2, 0.4)


def test_cost_coefficients():
    assert (MGMT_PER_HOP, SYNC_PER_HOP, SYNC_CONST_PER_HOP) == (0.02, 0.01, 0.05)


def test_channel_size_distribution():
    spec = NetworkSpec(nodes=2)
    assert math.exp(spec.lognormal_mu) == pytest.approx(152.0)
    assert math.exp(spec.lognormal_mu + spec.lognormal_sigma**2 / 2) == pytest.approx(403.0)
    caps = sample_capacities(np.random.default_rng(0), 200_000, spec.lognormal_mu, spec.lognormal_sigma, 10)
    assert caps.min() == 10
    assert np.median(caps) == pytest.approx(152, rel=0.02)
    assert caps.mean() == pytest.approx(403, rel=0.05)
