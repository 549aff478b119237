"""Ergodicity coefficient, the resample-or-hold chain family, and bounds."""

import numpy as np
import pytest

from bssched import (
    PerturbedChain,
    find_scrambling_power,
    is_scrambling,
    p_sigma_eps,
    stationary_distribution,
    tau1,
    tau1_series_bound,
    tau1_series_sum,
)

from oracles import random_stochastic_matrix, tau1_pairwise, tau1_random_search


# ---------------------------------------------------------------------------
# tau1 closed form
# ---------------------------------------------------------------------------


def test_tau1_identity_is_one():
    assert tau1(np.eye(4)) == pytest.approx(1.0, abs=1e-15)


def test_tau1_rank_one_is_zero():
    sigma = np.array([0.2, 0.3, 0.5])
    p = np.ones((3, 1)) @ sigma.reshape(1, -1)
    assert tau1(p) == pytest.approx(0.0, abs=1e-15)


def test_tau1_two_state_example():
    p = np.array([[0.9, 0.1], [0.1, 0.9]])
    assert tau1(p) == pytest.approx(0.8, abs=1e-12)
    assert tau1_pairwise(p) == pytest.approx(0.8, abs=1e-12)


def test_tau1_matches_pairwise_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(2, 7))
        p = random_stochastic_matrix(rng, n)
        assert tau1(p) == pytest.approx(tau1_pairwise(p), abs=1e-12)


def test_tau1_dominates_random_feasible_points():
    rng = np.random.default_rng(1)
    for _ in range(30):
        n = int(rng.integers(2, 7))
        p = random_stochastic_matrix(rng, n)
        assert tau1_random_search(p, rng) <= tau1(p) + 1e-12


def test_tau1_rejects_non_stochastic_input():
    with pytest.raises(ValueError):
        tau1(np.array([[0.5, 0.2], [0.3, 0.7]]))


# ---------------------------------------------------------------------------
# properties on random matrices
# ---------------------------------------------------------------------------


def test_submultiplicative_on_products():
    rng = np.random.default_rng(2)
    for _ in range(100):
        n = int(rng.integers(2, 7))
        p1 = random_stochastic_matrix(rng, n)
        p2 = random_stochastic_matrix(rng, n)
        assert tau1(p1 @ p2) <= tau1(p1) * tau1(p2) + 1e-12


def test_lipschitz_in_max_row_sum_norm():
    rng = np.random.default_rng(3)
    for _ in range(100):
        n = int(rng.integers(2, 7))
        p1 = random_stochastic_matrix(rng, n)
        p2 = random_stochastic_matrix(rng, n)
        gap = np.abs(p1 - p2).sum(axis=1).max()
        assert abs(tau1(p1) - tau1(p2)) <= gap + 1e-12


def test_contracts_pmf_differences():
    rng = np.random.default_rng(4)
    for _ in range(100):
        n = int(rng.integers(2, 7))
        p = random_stochastic_matrix(rng, n)
        x = rng.dirichlet(np.ones(n))
        y = rng.dirichlet(np.ones(n))
        lhs = np.abs(x @ p - y @ p).sum()
        assert lhs <= tau1(p) * np.abs(x - y).sum() + 1e-12


def test_power_bound():
    rng = np.random.default_rng(5)
    for _ in range(50):
        n = int(rng.integers(2, 6))
        p = random_stochastic_matrix(rng, n)
        for m in (1, 2, 3):
            for k in (m, 2 * m, 3 * m + 1):
                lhs = tau1(np.linalg.matrix_power(p, k))
                rhs = tau1(np.linalg.matrix_power(p, m)) ** (k // m)
                assert lhs <= rhs + 1e-12


# ---------------------------------------------------------------------------
# the resample-or-hold family
# ---------------------------------------------------------------------------


def test_family_matrix_layout():
    p = p_sigma_eps(np.array([0.5, 0.5]), 0.2)
    np.testing.assert_allclose(p, [[0.9, 0.1], [0.1, 0.9]], atol=1e-15)


def test_family_full_resampling_is_rank_one():
    sigma = np.array([0.1, 0.6, 0.3])
    p = p_sigma_eps(sigma, 1.0)
    for row in p:
        np.testing.assert_allclose(row, sigma, atol=1e-15)


def test_family_tau1_powers_are_geometric():
    rng = np.random.default_rng(6)
    for eps in (0.05, 0.2, 0.5):
        for _ in range(20):
            sigma = rng.dirichlet(np.ones(int(rng.integers(2, 6))))
            p = p_sigma_eps(sigma, eps)
            for ell in (1, 2, 5, 20):
                got = tau1(np.linalg.matrix_power(p, ell))
                assert got == pytest.approx((1 - eps) ** ell, abs=1e-9)


def test_family_stationary_distribution_is_sigma():
    sigma = np.array([0.25, 0.5, 0.25])
    pi = stationary_distribution(p_sigma_eps(sigma, 0.3))
    np.testing.assert_allclose(pi, sigma, atol=1e-10)


def test_family_series_sum_is_inverse_eps():
    rng = np.random.default_rng(7)
    for eps in (0.05, 0.2, 0.5):
        sigma = rng.dirichlet(np.ones(4))
        total = tau1_series_sum(p_sigma_eps(sigma, eps))
        assert total == pytest.approx(1.0 / eps, abs=1e-9)


# ---------------------------------------------------------------------------
# scrambling powers and series
# ---------------------------------------------------------------------------


def test_rank_one_is_scrambling_at_power_one():
    sigma = np.array([0.4, 0.3, 0.3])
    p = np.ones((3, 1)) @ sigma.reshape(1, -1)
    assert is_scrambling(p)
    assert find_scrambling_power(p) == 1


def test_periodic_swap_never_scrambles():
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert not is_scrambling(swap)
    assert find_scrambling_power(swap, max_power=64) is None
    for k in (1, 2, 3, 8):
        assert tau1(np.linalg.matrix_power(swap, k)) == pytest.approx(1.0)


def test_family_scrambles_immediately():
    p = p_sigma_eps(np.array([0.25, 0.25, 0.25, 0.25]), 0.2)
    assert find_scrambling_power(p) == 1


def test_delayed_scrambling_power():
    # deterministic cycle into an absorbing mixer: power 1 is not
    # scrambling, a later power is
    p = np.array(
        [
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.5, 0.25, 0.25],
        ]
    )
    assert not is_scrambling(p)
    power = find_scrambling_power(p, max_power=16)
    assert power is not None and power > 1
    assert is_scrambling(np.linalg.matrix_power(p, power))
    assert not is_scrambling(np.linalg.matrix_power(p, power - 1))


def test_series_sum_requires_eventual_scrambling():
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(ValueError, match="scrambling"):
        tau1_series_sum(swap)


def test_series_bound_dominates_series_sum():
    rng = np.random.default_rng(8)
    for _ in range(20):
        p = random_stochastic_matrix(rng, 4)
        if find_scrambling_power(p, max_power=64) is None:
            continue
        assert tau1_series_sum(p) <= tau1_series_bound(p) + 1e-9


# ---------------------------------------------------------------------------
# perturbed-chain deviation bounds
# ---------------------------------------------------------------------------


def random_perturbed_chain(rng, n_states=4, epsilon=0.01):
    """A scrambling base chain plus its stationary law, ready to bound."""
    while True:
        p_star = random_stochastic_matrix(rng, n_states)
        p_star = 0.5 * p_star + 0.5 / n_states  # force full support
        if find_scrambling_power(p_star, max_power=64) is not None:
            break
    sigma = stationary_distribution(p_star)
    y0 = rng.dirichlet(np.ones(n_states))
    return PerturbedChain(p_star=p_star, sigma_star=sigma, epsilon=epsilon, y0=y0)


def test_chain_validates_stationarity():
    p = p_sigma_eps(np.array([0.5, 0.5]), 0.2)
    with pytest.raises(ValueError, match="stationary"):
        PerturbedChain(
            p_star=p,
            sigma_star=np.array([0.9, 0.1]),
            epsilon=0.0,
            y0=np.array([1.0, 0.0]),
        )


def test_unperturbed_bound_vanishes():
    sigma = np.array([0.3, 0.7])
    chain = PerturbedChain(
        p_star=p_sigma_eps(sigma, 0.5),
        sigma_star=sigma,
        epsilon=0.0,
        y0=np.array([1.0, 0.0]),
    )
    bounds = chain.deviation_bound(60)
    assert bounds[-1] < 1e-9
    assert np.all(np.diff(bounds) <= 1e-12)  # decaying, no perturbation term


def test_perturbed_bound_caps_every_marginal():
    # random perturbations of the kernel at radius epsilon, simulated
    # marginals never exceed the bound
    rng = np.random.default_rng(9)
    horizon = 200
    for _ in range(100):
        chain = random_perturbed_chain(rng, epsilon=0.01)
        n = chain.p_star.shape[0]
        bounds = chain.deviation_bound(horizon)
        y = chain.y0.copy()
        deviations = np.empty(horizon)
        for step in range(horizon):
            noise = rng.uniform(-1.0, 1.0, size=(n, n))
            noise -= noise.mean(axis=1, keepdims=True)
            row_norm = np.abs(noise).sum(axis=1, keepdims=True)
            noise = chain.epsilon * noise / np.maximum(row_norm, 1e-12)
            p_slot = chain.p_star + noise
            p_slot = np.maximum(p_slot, 0.0)
            p_slot /= p_slot.sum(axis=1, keepdims=True)
            assert np.abs(p_slot - chain.p_star).sum(axis=1).max() <= chain.epsilon + 1e-9
            y = y @ p_slot
            deviations[step] = np.abs(y - chain.sigma_star).sum()
        assert np.all(deviations <= bounds + 1e-9)


def test_family_bound_has_geometric_tail():
    sigma = np.array([0.25, 0.25, 0.25, 0.25])
    eps_s, epsilon = 0.2, 0.01
    chain = PerturbedChain(
        p_star=p_sigma_eps(sigma, eps_s),
        sigma_star=sigma,
        epsilon=epsilon,
        y0=np.array([1.0, 0.0, 0.0, 0.0]),
    )
    bounds = chain.deviation_bound(400)
    d0 = np.abs(chain.y0 - sigma).sum()
    for n in (1, 5, 50, 400):
        partial = sum((1 - eps_s) ** ell for ell in range(n))
        expected = (1 - eps_s) ** n * d0 + epsilon * partial
        assert bounds[n - 1] == pytest.approx(expected, abs=1e-9)
    # limiting value from the closed geometric sum
    assert bounds[-1] == pytest.approx(epsilon / eps_s, abs=1e-6)
