import itertools
import math
import os
import subprocess

import numpy as np
import pytest

import dc2b


def catalog(n, d, seed=0):
    rng = np.random.default_rng(seed)
    return dc2b.ItemCatalog(list(range(1, n + 1)), rng.normal(size=(n, d)))


def test_kernel_entries():
    items = dc2b.ItemCatalog([1, 2], np.eye(2))
    k = dc2b.build_kernel(np.array([1.0, 0.0]), items, 0.5)
    assert np.allclose(k.matrix * math.exp(k.log_scale), [[math.e, 0], [0, 1]])
    assert np.allclose(k.log_quality, [math.log(1 / (1 + math.exp(-1))), math.log(0.5)])


def test_probabilities_sum_to_one():
    rng = np.random.default_rng(3)
    B = rng.normal(size=(5, 3))
    k = dc2b.Kernel.from_matrix(B @ B.T)
    total = sum(
        dc2b.slate_probability(k, list(s)) for r in range(6) for s in itertools.combinations(range(5), r)
    )
    assert abs(total - 1) < 1e-9


def test_greedy_matches_exhaustive_on_orthogonal_items():
    items = dc2b.ItemCatalog([1, 2, 3, 4], np.eye(4))
    k = dc2b.build_kernel(np.array([0.3, -0.2, 0.9, 0.1]), items, 1.0)
    g = dc2b.greedy_map(k, 2, [0, 1, 2, 3])
    e = dc2b.exhaustive_map(k, 2, [0, 1, 2, 3])
    assert sorted(g.items) == sorted(e.items) == [0, 2]
    assert g.objective == pytest.approx(e.objective)


def test_scalar_update_fixed_point():
    r = dc2b.update_features(dc2b.PosteriorState.prior(1, 1.0), np.ones((1, 1)), [1.0], 3.0, tol=1e-8)
    assert r.converged
    assert r.state.mean[0] == pytest.approx(6.00852394857856, abs=1e-8)
    assert r.state.covariance[0, 0] == pytest.approx(0.9243882997813169, abs=1e-8)
    lam = dc2b.lambda_of_xi(r.xi[0])
    assert r.state.covariance[0, 0] == pytest.approx(1 / (1 + 2 * lam))


def test_update_rejects_fractional_feedback():
    items = catalog(4, 3)
    with pytest.raises(ValueError):
        dc2b.update(dc2b.PosteriorState.prior(3), [0, 1], [0.5, 1.0], items, 1.0)


def test_sampling_is_seeded():
    s = dc2b.PosteriorState.prior(4, 2.0)
    assert np.array_equal(dc2b.sample_theta(s, 11), dc2b.sample_theta(s, 11))
    assert not np.array_equal(dc2b.sample_theta(s, 11), dc2b.sample_theta(s, 12))


def test_f_measure_and_ild():
    assert dc2b.f_measure(0.2882, 0.8118) == pytest.approx(0.4254, abs=5e-5)
    items = dc2b.ItemCatalog([1, 2, 3], np.eye(3), [[0, 1], [1], [2]])
    assert dc2b.slate_ild([0, 1, 2], items) == pytest.approx((0.5 + 1 + 1) / 3)
    assert dc2b.slate_ild([0], items) is None


def test_regret_oracle_is_zero_and_random_is_worse():
    oracle = dc2b.simulate_regret("oracle", horizon=50, episodes=2)
    rand = dc2b.simulate_regret("random", horizon=50, episodes=2)
    assert max(abs(v) for v in oracle) < 1e-12
    assert rand[-1] > 0


@pytest.mark.skipif(not os.environ.get("DC2B_CLI"), reason="CLI path not provided")
def test_cli_regret_runs(tmp_path):
    cmd = [os.environ["DC2B_CLI"], "regret", "--horizon", "20", "--episodes", "2", "--out", str(tmp_path)]
    subprocess.run(cmd, check=True, capture_output=True)
    lines = (tmp_path / "regret.csv").read_text().splitlines()
    assert len(lines) == 21
