"""Slot-by-slot simulation engine.

Event order inside slot t: arrivals are drawn, the policy picks the
activation and a rate matrix from the restricted region for the observed
channel state, transmissions depart (capped by queue content), and the
slot's arrivals join the queues. The queue recorded for slot t is the
pre-arrival queue the policy weighted, so Q(t+1) = Q(t) - departures + A(t).

All randomness comes from a single generator with a fixed draw order per
slot: the arrival matrix first, then one uniform for the channel state,
then whatever the policy consumes. Identical configuration and seed give
byte-identical traces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import NetworkConfig, activation_id, all_on, network_cost, step_queues
from .policies import Policy
from .rateregion import ChannelModel

ARRIVAL_LAWS = ("bernoulli", "binomial")


@dataclass(frozen=True)
class RegimeSchedule:
    """Piecewise-constant scaling of the arrival rates.

    ``changes`` holds (start_slot, scale) pairs; a scale applies from its
    start slot (inclusive, 1-based) until the next change. Slots before the
    first change use scale 1.0.
    """

    changes: tuple[tuple[int, float], ...]

    def __post_init__(self):
        starts = [s for s, _ in self.changes]
        if any(s < 1 for s in starts):
            raise ValueError("regime start slots are 1-based")
        if starts != sorted(starts) or len(set(starts)) != len(starts):
            raise ValueError("regime start slots must be strictly increasing")
        if any(scale <= 0 for _, scale in self.changes):
            raise ValueError("regime scales must be positive")

    def scale_at(self, t: int) -> float:
        scale = 1.0
        for start, value in self.changes:
            if t >= start:
                scale = value
            else:
                break
        return scale

    def boundaries(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.changes)


@dataclass
class SimTrace:
    """Per-slot records of one run plus end-of-run state.

    ``total_queue`` and ``v_quad`` describe the pre-arrival queue of each
    slot (sum and sum of squares); ``cost`` is the activation cost paid in
    the slot; ``j_bits`` encodes the activation vector as an integer;
    ``mu_err`` / ``lambda_err`` are L1 estimate errors against the true
    channel pmf and the currently effective arrival rates (NaN for
    policies without estimates).
    """

    policy_name: str
    horizon: int
    seed: int | None
    n_stations: int
    total_queue: np.ndarray
    v_quad: np.ndarray
    cost: np.ndarray
    served: np.ndarray
    j_bits: np.ndarray
    explore: np.ndarray
    mu_err: np.ndarray
    lambda_err: np.ndarray
    final_queues: np.ndarray

    @property
    def avg_cost(self) -> float:
        return float(self.cost.mean())

    @property
    def switch_count(self) -> int:
        """Slots whose activation differs from the previous slot's."""
        return int(np.count_nonzero(np.diff(self.j_bits)))

    def running_avg_cost(self) -> np.ndarray:
        return np.cumsum(self.cost) / np.arange(1, self.horizon + 1)

    def windowed_cost(self, window: int = 200) -> np.ndarray:
        """Mean cost over the trailing ``window`` slots (shorter at the start)."""
        csum = np.concatenate([[0.0], np.cumsum(self.cost)])
        t = np.arange(1, self.horizon + 1)
        lo = np.maximum(t - window, 0)
        return (csum[t] - csum[lo]) / (t - lo)

    def occupancy(self) -> dict[int, float]:
        """Fraction of slots spent in each activation vector (by bit id)."""
        ids, counts = np.unique(self.j_bits, return_counts=True)
        return {int(i): float(c) / self.horizon for i, c in zip(ids, counts)}


def draw_channel_index(cum_pmf: np.ndarray, rng: np.random.Generator) -> int:
    idx = int(np.searchsorted(cum_pmf, rng.random(), side="right"))
    return min(idx, cum_pmf.shape[0] - 1)


def run(
    cfg: NetworkConfig,
    cm: ChannelModel,
    policy: Policy,
    horizon: int,
    seed: int | None = None,
    rng: np.random.Generator | None = None,
    regime: RegimeSchedule | None = None,
    j0: np.ndarray | None = None,
    q0: np.ndarray | None = None,
    arrival_law: str = "bernoulli",
) -> SimTrace:
    """Simulate ``horizon`` slots and return the trace.

    Arrivals are i.i.d. per link with mean arrival_rates (times the regime
    scale): Bernoulli by default, or binomial(max_arrivals, rate /
    max_arrivals). ``j0`` is the activation before the first slot (all ON
    by default) and ``q0`` the initial queue matrix (empty by default).
    Pass either a seed or an existing generator; a shared generator lets
    the caller make policy-construction draws part of the same stream.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if arrival_law not in ARRIVAL_LAWS:
        raise ValueError(f"arrival_law must be one of {ARRIVAL_LAWS}")
    if rng is None:
        rng = np.random.default_rng(seed)

    shape = (cfg.n_stations, cfg.n_users)
    q = np.zeros(shape, dtype=np.int64) if q0 is None else np.array(q0, dtype=np.int64)
    if q.shape != shape or np.any(q < 0):
        raise ValueError("q0 must be a nonnegative matrix of shape (M, n)")
    j_prev = all_on(cfg.n_stations) if j0 is None else np.asarray(j0, dtype=np.int64)
    policy.reset(j_prev)

    base_rates = np.asarray(cfg.arrival_rates, dtype=float)
    cum_pmf = np.cumsum(np.asarray(cm.pmf, dtype=float))
    true_mu = np.asarray(cm.pmf, dtype=float)

    trace = SimTrace(
        policy_name=policy.name,
        horizon=horizon,
        seed=seed,
        n_stations=cfg.n_stations,
        total_queue=np.zeros(horizon, dtype=np.int64),
        v_quad=np.zeros(horizon, dtype=np.int64),
        cost=np.zeros(horizon),
        served=np.zeros(horizon, dtype=np.int64),
        j_bits=np.zeros(horizon, dtype=np.int64),
        explore=np.zeros(horizon, dtype=bool),
        mu_err=np.full(horizon, np.nan),
        lambda_err=np.full(horizon, np.nan),
        final_queues=q,
    )

    scale = None
    rates_now = base_rates
    for t in range(1, horizon + 1):
        new_scale = regime.scale_at(t) if regime is not None else 1.0
        if new_scale != scale:
            scale = new_scale
            rates_now = base_rates * scale
            if arrival_law == "bernoulli" and np.any(rates_now > 1.0):
                raise ValueError(
                    f"bernoulli arrivals need rate <= 1; got scale {scale}"
                )
            if np.any(rates_now > cfg.max_arrivals):
                raise ValueError("scaled arrival rate exceeds max_arrivals")

        if arrival_law == "bernoulli":
            a = (rng.random(shape) < rates_now).astype(np.int64)
        else:
            a = rng.binomial(cfg.max_arrivals, rates_now / cfg.max_arrivals)
        h_index = draw_channel_index(cum_pmf, rng)

        j, s, explore = policy.step(t, q, h_index, a, rng)

        i = t - 1
        trace.total_queue[i] = q.sum()
        trace.v_quad[i] = int((q * q).sum())
        trace.cost[i] = network_cost(j_prev, j, cfg)
        trace.j_bits[i] = activation_id(j)
        trace.explore[i] = explore
        if policy.mu_hat is not None:
            trace.mu_err[i] = float(np.abs(policy.mu_hat - true_mu).sum())
        if policy.lambda_hat is not None:
            trace.lambda_err[i] = float(np.abs(policy.lambda_hat - rates_now).sum())

        q, departures = step_queues(q, s, a)
        trace.served[i] = int(departures.sum())
        j_prev = j

    trace.final_queues = q
    return trace


@dataclass
class DriftDiagnostic:
    """T-step quadratic Lyapunov drift, conditioned on large queues.

    ``series[t-1]`` is V(Q(t+T)) - V(Q(t)) with V the sum of squared queue
    lengths. ``conditional_mean`` averages the drift over slots whose total
    pre-arrival queue exceeds the threshold (NaN when no slot qualifies);
    a negative value is the stability signature, a positive one indicates
    queue growth.
    """

    horizon_steps: int
    threshold: float
    series: np.ndarray
    slots_above: int
    conditional_mean: float


def drift_diagnostic(
    trace: SimTrace, horizon_steps: int = 100, threshold: float = 0.0
) -> DriftDiagnostic:
    if not 1 <= horizon_steps < trace.horizon:
        raise ValueError("horizon_steps must lie in [1, horizon)")
    v = trace.v_quad.astype(float)
    series = v[horizon_steps:] - v[: -horizon_steps]
    above = trace.total_queue[: -horizon_steps] > threshold
    count = int(np.count_nonzero(above))
    mean = float(series[above].mean()) if count else float("nan")
    return DriftDiagnostic(horizon_steps, threshold, series, count, mean)


def stability_fraction(
    trace: SimTrace,
    q_bar: float,
    start_slot: int = 1,
    end_slot: int | None = None,
) -> float:
    """Fraction of slots in [start_slot, end_slot] with total queue <= q_bar."""
    end_slot = trace.horizon if end_slot is None else end_slot
    if not 1 <= start_slot <= end_slot <= trace.horizon:
        raise ValueError("invalid slot window")
    window = trace.total_queue[start_slot - 1 : end_slot]
    return float(np.count_nonzero(window <= q_bar)) / window.shape[0]
