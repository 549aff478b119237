"""Core model: configuration validation, activation math, cost, queues."""

import numpy as np
import pytest

from bssched import (
    NetworkConfig,
    activation_id,
    all_off,
    all_on,
    enumerate_activations,
    network_cost,
    restrict_rates,
    step_queues,
)


def small_cfg(**overrides):
    kwargs = dict(
        n_users=2,
        n_stations=3,
        adjacency=((0, 0), (1, 0), (1, 1), (2, 1)),
        arrival_rates=np.zeros((3, 2)),
    )
    kwargs.update(overrides)
    return NetworkConfig(**kwargs)


# ---------------------------------------------------------------------------
# configuration validation
# ---------------------------------------------------------------------------


def test_valid_config_roundtrip():
    cfg = small_cfg()
    assert cfg.validate() == []
    assert cfg.station_degrees().tolist() == [1, 2, 1]
    assert cfg.adjacency_mask().sum() == 4


def test_config_rejects_out_of_range_adjacency():
    with pytest.raises(ValueError, match="out of range"):
        small_cfg(adjacency=((0, 0), (3, 1)))


def test_config_rejects_duplicate_links():
    with pytest.raises(ValueError, match="duplicate"):
        small_cfg(adjacency=((0, 0), (0, 0)))


def test_config_rejects_offadjacency_rates():
    rates = np.zeros((3, 2))
    rates[0, 1] = 0.2
    with pytest.raises(ValueError, match="off the adjacency"):
        small_cfg(arrival_rates=rates)


def test_config_rejects_negative_cost():
    with pytest.raises(ValueError, match="nonnegative"):
        small_cfg(active_cost=-1.0)


def test_config_rejects_rates_above_max_arrivals():
    rates = np.zeros((3, 2))
    rates[0, 0] = 1.5
    with pytest.raises(ValueError, match="max_arrivals"):
        small_cfg(arrival_rates=rates)


def test_config_collects_all_errors():
    try:
        NetworkConfig(
            n_users=0,
            n_stations=0,
            adjacency=(),
            arrival_rates=np.zeros((0, 0)),
        )
    except ValueError as exc:
        text = str(exc)
        assert "n_users" in text and "n_stations" in text and "adjacency" in text
    else:
        pytest.fail("expected a ValueError")


# ---------------------------------------------------------------------------
# activation enumeration
# ---------------------------------------------------------------------------


def test_enumerate_activations_binary_counting():
    acts = enumerate_activations(3)
    assert acts.shape == (8, 3)
    assert acts[0].tolist() == [0, 0, 0]
    assert acts[1].tolist() == [0, 0, 1]
    assert acts[4].tolist() == [1, 0, 0]
    assert acts[7].tolist() == [1, 1, 1]


def test_activation_id_inverts_enumeration():
    acts = enumerate_activations(4)
    for k in range(acts.shape[0]):
        assert activation_id(acts[k]) == k


def test_all_on_off_helpers():
    assert all_on(3).tolist() == [1, 1, 1]
    assert all_off(3).tolist() == [0, 0, 0]
    assert activation_id(all_on(3)) == 7
    assert activation_id(all_off(3)) == 0


# ---------------------------------------------------------------------------
# network cost
# ---------------------------------------------------------------------------


def test_cost_switch_off_plus_active():
    cfg = small_cfg()
    # one station turns off, two stay on
    assert network_cost(np.array([1, 1, 0]), np.array([0, 1, 1]), cfg) == 3.0


def test_cost_all_off_is_zero_with_defaults():
    cfg = small_cfg()
    z = np.zeros(3, dtype=int)
    assert network_cost(z, z, cfg) == 0.0


def test_cost_sleep_term():
    cfg = small_cfg(sleep_cost=2.0)
    z = np.zeros(3, dtype=int)
    assert network_cost(z, z, cfg) == 6.0


def test_cost_full_shutdown():
    cfg = small_cfg(switch_off_cost=1.0, active_cost=0.0)
    assert network_cost(all_on(3), all_off(3), cfg) == 3.0


def test_cost_extended_terms():
    cfg = small_cfg(
        switch_off_cost=2.0, active_cost=3.0, switch_on_cost=5.0, sleep_cost=7.0
    )
    prev = np.array([1, 0, 0])
    cur = np.array([0, 1, 1])
    # 1 off-switch, 2 on-switches, 2 active, 1 sleeping
    assert network_cost(prev, cur, cfg) == 2.0 + 5.0 * 2 + 3.0 * 2 + 7.0


def test_cost_nonnegative_and_zero_only_when_everything_off():
    cfg = small_cfg()
    acts = enumerate_activations(3)
    for prev in acts:
        for cur in acts:
            c = network_cost(prev, cur, cfg)
            assert c >= 0.0
            if c == 0.0:
                assert cur.sum() == 0 and np.all(prev <= cur)


# ---------------------------------------------------------------------------
# rate restriction
# ---------------------------------------------------------------------------


def test_restrict_identity_and_annihilation():
    r = np.array([[2, 0], [0, 1]])
    assert np.array_equal(restrict_rates(r, np.array([1, 1])), r)
    assert np.array_equal(restrict_rates(r, np.array([0, 0])), np.zeros((2, 2)))


def test_restrict_single_row():
    r = np.array([[2, 0], [0, 1]])
    expected = np.array([[2, 0], [0, 0]])
    assert np.array_equal(restrict_rates(r, np.array([1, 0])), expected)


def test_restrict_idempotent_and_monotone():
    rng = np.random.default_rng(0)
    for _ in range(50):
        r = rng.integers(0, 3, size=(3, 4))
        j = rng.integers(0, 2, size=3)
        j_small = j * rng.integers(0, 2, size=3)
        once = restrict_rates(r, j)
        assert np.array_equal(restrict_rates(once, j), once)
        assert np.all(restrict_rates(r, j_small) <= once)


# ---------------------------------------------------------------------------
# queue update
# ---------------------------------------------------------------------------


def test_step_queues_caps_service_at_queue():
    next_q, dep = step_queues(np.array([[3]]), np.array([[5]]), np.array([[1]]))
    assert next_q.tolist() == [[1]] and dep.tolist() == [[3]]


def test_step_queues_pure_arrival():
    next_q, dep = step_queues(np.array([[0]]), np.array([[0]]), np.array([[2]]))
    assert next_q.tolist() == [[2]] and dep.tolist() == [[0]]


def test_step_queues_elementwise():
    next_q, dep = step_queues(
        np.array([[4, 1]]), np.array([[2, 1]]), np.array([[0, 0]])
    )
    assert next_q.tolist() == [[2, 0]] and dep.tolist() == [[2, 1]]


def test_step_queues_conservation_property():
    rng = np.random.default_rng(1)
    for _ in range(200):
        q = rng.integers(0, 10, size=(3, 4))
        s = rng.integers(0, 4, size=(3, 4))
        a = rng.integers(0, 2, size=(3, 4))
        next_q, dep = step_queues(q, s, a)
        assert np.array_equal(next_q, q - dep + a)
        assert np.all(dep == np.minimum(s, q))
        assert np.all(next_q >= 0)
