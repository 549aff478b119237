"""Scheduling policies: activation control plus Max-Weight rate allocation.

Every policy implements ``reset(j0)`` and ``step(t, q, h_index, arrivals,
rng)`` and returns the activation vector together with the chosen rate
matrix for the slot. Queue weights are the pre-arrival queue lengths; the
simulation engine applies departures before the slot's arrivals.

Randomness is consumed from the generator passed into ``step`` in a fixed
documented order (resample coin, then the optional activation draw, then
the explore coin for the learning policies), so runs are reproducible for
a given seed. The optional ``min_switch_gap`` hysteresis suppresses the
resample coin entirely (no uniform is consumed) for the L - 1 slots after
a resample event.
"""

from __future__ import annotations

import math

import numpy as np

from .lp import beta_to_alpha, build_lp, perturb_cost, solve_lp
from .model import NetworkConfig, activation_id, all_on
from .rateregion import ChannelModel, RateRegion, RegionTable

POLICY_NAMES = (
    "always_on",
    "static_split_mw",
    "static_split_static",
    "algorithm1",
    "algorithm1_tracking",
)


class PolicyError(Exception):
    """Raised when a policy cannot be constructed for the scenario."""


def max_weight(q: np.ndarray, region: RateRegion) -> int:
    """Index of the region member maximizing sum(q * r).

    Ties break toward the earliest member in region enumeration order, so
    the zero matrix wins when all queues are empty.
    """
    weights = region.members.reshape(len(region), -1) @ q.ravel()
    return int(np.argmax(weights))


def _draw_index(pmf: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw consuming exactly one uniform."""
    cum = np.cumsum(pmf)
    idx = int(np.searchsorted(cum, rng.random(), side="right"))
    return min(idx, pmf.shape[0] - 1)


def _clean_pmf(v: np.ndarray) -> np.ndarray:
    v = np.maximum(v, 0.0)
    total = v.sum()
    if total <= 0:
        raise PolicyError("degenerate activation distribution")
    return v / total


class Policy:
    """Common state: the previous activation vector and estimate handles."""

    name = "policy"
    mu_hat: np.ndarray | None = None
    lambda_hat: np.ndarray | None = None

    def __init__(self, cfg: NetworkConfig, cm: ChannelModel):
        self.cfg = cfg
        self.cm = cm
        self.table = RegionTable(cfg, cm)
        self._j = all_on(cfg.n_stations)
        self.min_switch_gap = 0
        self._last_switch: int | None = None
        self.resample_count = 0

    def reset(self, j0: np.ndarray) -> None:
        self._j = np.asarray(j0, dtype=np.int64).copy()
        self._last_switch = None
        self.resample_count = 0

    def _switch_allowed(self, t: int) -> bool:
        """Hysteresis gate: False within min_switch_gap slots of a switch."""
        if self.min_switch_gap <= 0 or self._last_switch is None:
            return True
        return t - self._last_switch >= self.min_switch_gap

    def step(
        self,
        t: int,
        q: np.ndarray,
        h_index: int,
        arrivals: np.ndarray,
        rng: np.random.Generator,
    ) -> tuple[np.ndarray, np.ndarray, bool]:
        raise NotImplementedError


class AlwaysOnMaxWeight(Policy):
    """Keep every station active and serve by Max-Weight."""

    name = "always_on"

    def step(self, t, q, h_index, arrivals, rng):
        j = all_on(self.cfg.n_stations)
        region = self.table.full(h_index)
        s = region.members[max_weight(q, region)]
        self._j = j
        return j, s, False


class _ResamplingActivation(Policy):
    """Shared machinery: hold the activation, resample from sigma w.p. eps_s.

    The induced activation chain is exactly the resample-or-hold kernel
    eps_s * 1 sigma^T + (1 - eps_s) * I over the activation vectors.
    """

    def __init__(self, cfg, cm, eps_s: float, eps_g: float, min_switch_gap: int = 0):
        super().__init__(cfg, cm)
        if not 0.0 <= eps_s <= 1.0:
            raise PolicyError("eps_s must lie in [0, 1]")
        if min_switch_gap < 0:
            raise PolicyError("min_switch_gap must be a nonnegative integer")
        self.eps_s = float(eps_s)
        self.eps_g = float(eps_g)
        self.min_switch_gap = int(min_switch_gap)
        self.problem = build_lp(cfg, cm, eps_g=eps_g)
        solution = solve_lp(self.problem)
        if solution.status != "optimal":
            raise PolicyError(
                "planning LP is infeasible: the scenario cannot be stabilized "
                f"with slack eps_g={eps_g}"
            )
        self.solution = solution
        self.sigma_star = _clean_pmf(solution.sigma)
        self.planned_cost = float(solution.objective)

    def _activation(self, t: int, rng: np.random.Generator) -> np.ndarray:
        if self._switch_allowed(t) and rng.random() < self.eps_s:
            j_idx = _draw_index(self.sigma_star, rng)
            self._j = self.problem.activations[j_idx].copy()
            self._last_switch = t
            self.resample_count += 1
        return self._j


class StaticSplitMaxWeight(_ResamplingActivation):
    """Resample the activation from the planned sigma, serve by Max-Weight."""

    name = "static_split_mw"

    def step(self, t, q, h_index, arrivals, rng):
        j = self._activation(t, rng)
        region = self.table.restricted(j, h_index)
        s = region.members[max_weight(q, region)]
        return j, s, False


class StaticSplitStatic(_ResamplingActivation):
    """Resample the activation and also draw rates from the planned alpha.

    Ignores the queues entirely; only useful to validate that the planning
    LP's offered rates are what the simulation actually delivers.
    """

    name = "static_split_static"

    def __init__(self, cfg, cm, eps_s: float, eps_g: float, min_switch_gap: int = 0):
        super().__init__(cfg, cm, eps_s, eps_g, min_switch_gap)
        self.alpha = beta_to_alpha(self.problem, self.solution)

    def step(self, t, q, h_index, arrivals, rng):
        j = self._activation(t, rng)
        j_idx = activation_id(j)
        region = self.problem.regions[j_idx][h_index]
        s = region.members[_draw_index(self.alpha[(j_idx, h_index)], rng)]
        return j, s, False


class LearningMaxWeight(Policy):
    """Explore-exploit scheduling without prior channel or traffic knowledge.

    Holds a baseline activation j_tilde that is resampled at rate eps_s from
    the solution of the planning LP under current estimates (mu_hat,
    lambda_hat), with the cost vector perturbed once at construction so the
    LP optimum is unique. Independently, each slot t is an explore slot with
    probability 2 ln(t) / t: all stations turn on (so the actual activation
    always dominates j_tilde), the full channel state is observed, and the
    estimates are updated from this slot's channel state and arrivals.
    Exploit slots use j_tilde as is. Rates always come from Max-Weight on
    the restricted region.

    Until the first explore slot there are no estimates; resample events
    then leave j_tilde unchanged, as they also do whenever the estimated LP
    is infeasible.

    The tracking variant keeps both the explore probability and the
    estimate learning rate from decaying below ``learning_floor`` so the
    policy follows slow changes in the arrival process.
    """

    name = "algorithm1"

    def __init__(
        self,
        cfg,
        cm,
        eps_s: float,
        eps_p: float,
        eps_g: float,
        rng: np.random.Generator,
        tracking: bool = False,
        learning_floor: float = 0.001,
        update_arrivals_every_slot: bool = False,
        min_switch_gap: int = 0,
    ):
        super().__init__(cfg, cm)
        if not 0.0 <= eps_s <= 1.0:
            raise PolicyError("eps_s must lie in [0, 1]")
        if min_switch_gap < 0:
            raise PolicyError("min_switch_gap must be a nonnegative integer")
        self.min_switch_gap = int(min_switch_gap)
        self.eps_s = float(eps_s)
        self.eps_p = float(eps_p)
        self.eps_g = float(eps_g)
        self.tracking = bool(tracking)
        self.learning_floor = float(learning_floor)
        self.update_arrivals_every_slot = bool(update_arrivals_every_slot)
        if self.tracking:
            self.name = "algorithm1_tracking"

        self.problem = build_lp(cfg, cm, eps_g=eps_g)
        self.cost = perturb_cost(self.problem, eps_p, rng)
        shape = (cfg.n_stations, cfg.n_users)
        self.mu_hat = np.zeros(cm.n_states)
        self.lambda_hat = np.zeros(shape)
        self.explore_count = 0
        self._lambda_count = 0
        self._estimate_version = 0
        self._solved_version = -1
        self._sigma_hat: np.ndarray | None = None
        self._j_tilde = all_on(cfg.n_stations)

    def reset(self, j0: np.ndarray) -> None:
        super().reset(j0)
        self._j_tilde = np.asarray(j0, dtype=np.int64).copy()
        self.mu_hat = np.zeros(self.cm.n_states)
        self.lambda_hat = np.zeros((self.cfg.n_stations, self.cfg.n_users))
        self.explore_count = 0
        self._lambda_count = 0
        self._estimate_version = 0
        self._solved_version = -1
        self._sigma_hat = None

    def explore_probability(self, t: int) -> float:
        base = 2.0 * math.log(t) / t if t >= 1 else 0.0
        if self.tracking:
            base = max(base, self.learning_floor)
        return min(base, 1.0)

    def _learning_rate(self) -> float:
        rate = 1.0 / self.explore_count
        if self.tracking:
            rate = max(rate, self.learning_floor)
        return rate

    def _resample_j_tilde(self, rng: np.random.Generator) -> None:
        """Resample event: refresh sigma_hat if estimates moved, then draw.

        The LP depends only on the estimates, and the solver is
        deterministic, so re-solving with unchanged estimates would return
        the identical sigma_hat; the solution is cached per estimate
        version. Without estimates, or when the estimated LP is infeasible,
        j_tilde stays as it is.
        """
        if self.explore_count == 0 and self._lambda_count == 0:
            return
        if self._solved_version != self._estimate_version:
            solution = solve_lp(
                self.problem,
                cost=self.cost,
                mu=self.mu_hat,
                lam=self.lambda_hat,
            )
            self._sigma_hat = (
                _clean_pmf(solution.sigma) if solution.status == "optimal" else None
            )
            self._solved_version = self._estimate_version
        if self._sigma_hat is not None:
            j_idx = _draw_index(self._sigma_hat, rng)
            self._j_tilde = self.problem.activations[j_idx].copy()

    def _update_estimates(self, h_index: int, arrivals: np.ndarray) -> None:
        self.explore_count += 1
        rate = self._learning_rate()
        onehot = np.zeros(self.cm.n_states)
        onehot[h_index] = 1.0
        self.mu_hat += rate * (onehot - self.mu_hat)
        if not self.update_arrivals_every_slot:
            self.lambda_hat += rate * (arrivals - self.lambda_hat)
        self._estimate_version += 1

    def _update_lambda_every_slot(self, arrivals: np.ndarray) -> None:
        self._lambda_count += 1
        rate = 1.0 / self._lambda_count
        if self.tracking:
            rate = max(rate, self.learning_floor)
        self.lambda_hat += rate * (arrivals - self.lambda_hat)
        self._estimate_version += 1

    def step(self, t, q, h_index, arrivals, rng):
        if self._switch_allowed(t) and rng.random() < self.eps_s:
            self._last_switch = t
            self.resample_count += 1
            self._resample_j_tilde(rng)
        explore = rng.random() < self.explore_probability(t)
        if explore:
            j = all_on(self.cfg.n_stations)
            self._update_estimates(h_index, arrivals)
        else:
            j = self._j_tilde.copy()
        if self.update_arrivals_every_slot:
            self._update_lambda_every_slot(arrivals)
        region = self.table.restricted(j, h_index)
        s = region.members[max_weight(q, region)]
        self._j = j
        return j, s, explore

    @property
    def j_tilde(self) -> np.ndarray:
        return self._j_tilde


def make_policy(
    name: str,
    cfg: NetworkConfig,
    cm: ChannelModel,
    rng: np.random.Generator,
    params: dict | None = None,
) -> Policy:
    """Build a policy by its configuration name.

    ``rng`` is only consumed by policies that randomize their construction
    (the learning policies draw their cost perturbation direction).
    """
    params = dict(params or {})
    if name == "always_on":
        return AlwaysOnMaxWeight(cfg, cm)
    gap = params.get("min_switch_gap", 0)
    if name == "static_split_mw":
        return StaticSplitMaxWeight(
            cfg,
            cm,
            eps_s=params.get("eps_s", 0.05),
            eps_g=params.get("eps_g", 0.05),
            min_switch_gap=gap,
        )
    if name == "static_split_static":
        return StaticSplitStatic(
            cfg,
            cm,
            eps_s=params.get("eps_s", 0.05),
            eps_g=params.get("eps_g", 0.05),
            min_switch_gap=gap,
        )
    if name in ("algorithm1", "algorithm1_tracking"):
        return LearningMaxWeight(
            cfg,
            cm,
            eps_s=params.get("eps_s", 0.05),
            eps_p=params.get("eps_p", 0.01),
            eps_g=params.get("eps_g", 0.05),
            rng=rng,
            tracking=(name == "algorithm1_tracking"),
            learning_floor=params.get("learning_floor", 0.001),
            update_arrivals_every_slot=params.get(
                "update_arrivals_every_slot", False
            ),
            min_switch_gap=gap,
        )
    raise PolicyError(f"unknown policy {name!r}; expected one of {POLICY_NAMES}")
