"""Channel model and feasible service-rate regions.

A channel state fixes the per-link rate matrix available in a slot. The
feasible region R(j, h) is the finite set of rate matrices the scheduler may
pick from when the activation vector is j and the channel state is h. With
every station active the region is R(1, h); switching stations off only
removes choices: R(j, h) = {r * j : r in R(1, h)} after dropping duplicates,
so regions are nested along the activation partial order.

Two interference models are supported. "one_user_per_station" builds the
region combinatorially: each active station either idles or serves exactly
one adjacent user at that link's current rate. "explicit" takes the region
member list for every channel state straight from the configuration.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .model import NetworkConfig, activation_id

ONE_USER_PER_STATION = "one_user_per_station"
EXPLICIT = "explicit"


@dataclass(frozen=True)
class ChannelState:
    """One channel state: a name plus the per-link rate matrix."""

    name: str
    rates: np.ndarray  # (n_stations, n_users), integer, zero off-adjacency


@dataclass(frozen=True)
class ChannelModel:
    """I.i.d. channel: states with probabilities, plus the interference rule.

    ``explicit_regions`` is only used when ``interference == "explicit"``;
    it lists, per channel state, every member of R(1, h) as an array of
    shape (K, n_stations, n_users).
    """

    states: tuple[ChannelState, ...]
    pmf: np.ndarray
    interference: str = ONE_USER_PER_STATION
    explicit_regions: tuple[np.ndarray, ...] | None = None

    def __post_init__(self):
        pmf = np.asarray(self.pmf, dtype=float)
        if pmf.shape != (len(self.states),):
            raise ValueError("pmf length must match number of states")
        if np.any(pmf < 0) or abs(pmf.sum() - 1.0) > 1e-9:
            raise ValueError("pmf must be a probability vector")
        if self.interference not in (ONE_USER_PER_STATION, EXPLICIT):
            raise ValueError(f"unknown interference model {self.interference!r}")
        if self.interference == EXPLICIT and self.explicit_regions is None:
            raise ValueError("explicit interference needs explicit_regions")

    @property
    def n_states(self) -> int:
        return len(self.states)

    def rates_for(self, h_index: int) -> np.ndarray:
        return self.states[h_index].rates

    def validate_against(self, cfg: NetworkConfig) -> list[str]:
        """All consistency problems between this channel model and ``cfg``."""
        errors = []
        mask = cfg.adjacency_mask()
        for i, st in enumerate(self.states):
            r = np.asarray(st.rates)
            if r.shape != (cfg.n_stations, cfg.n_users):
                errors.append(f"state {st.name!r}: rates shape {r.shape} is wrong")
                continue
            if np.any(r < 0) or np.any(r > cfg.max_rate):
                errors.append(f"state {st.name!r}: rates outside [0, max_rate]")
            if np.any(r[~mask] != 0):
                errors.append(f"state {st.name!r}: nonzero rate off the adjacency")
        if self.interference == EXPLICIT:
            for i, members in enumerate(self.explicit_regions or ()):
                arr = np.asarray(members)
                if arr.ndim != 3 or arr.shape[1:] != (cfg.n_stations, cfg.n_users):
                    errors.append(f"state {i}: region members have wrong shape")
                    continue
                if not np.any(np.all(arr == 0, axis=(1, 2))):
                    errors.append(f"state {i}: region must contain the zero matrix")
                if np.any(arr < 0) or np.any(arr > cfg.max_rate):
                    errors.append(f"state {i}: region rates outside [0, max_rate]")
                if np.any(arr[:, ~mask] != 0):
                    errors.append(f"state {i}: region rate off the adjacency")
        return errors


@dataclass(frozen=True)
class RateRegion:
    """A finite set of feasible rate matrices, stacked as (K, M, n)."""

    members: np.ndarray

    def __len__(self) -> int:
        return self.members.shape[0]

    def __iter__(self):
        return iter(self.members)


def _dedupe_members(stacked: np.ndarray) -> np.ndarray:
    """Drop duplicate matrices, keeping first occurrence order."""
    seen: dict[bytes, None] = {}
    keep = []
    for i in range(stacked.shape[0]):
        key = stacked[i].tobytes()
        if key not in seen:
            seen[key] = None
            keep.append(i)
    return stacked[keep]


def full_region(cm: ChannelModel, cfg: NetworkConfig, h_index: int) -> RateRegion:
    """R(1, h): every feasible rate matrix with all stations active.

    For one_user_per_station the members are all combinations of per-station
    choices, each station idling or serving one adjacent user with a positive
    current rate. The all-zero matrix is always member 0.
    """
    if cm.interference == EXPLICIT:
        assert cm.explicit_regions is not None
        return RateRegion(np.asarray(cm.explicit_regions[h_index], dtype=np.int64))

    rates = cm.rates_for(h_index)
    mask = cfg.adjacency_mask()
    options: list[list[np.ndarray]] = []
    for m in range(cfg.n_stations):
        rows = [np.zeros(cfg.n_users, dtype=np.int64)]
        for u in range(cfg.n_users):
            if mask[m, u] and rates[m, u] > 0:
                row = np.zeros(cfg.n_users, dtype=np.int64)
                row[u] = rates[m, u]
                rows.append(row)
        options.append(rows)
    members = np.array(
        [np.stack(combo) for combo in itertools.product(*options)], dtype=np.int64
    )
    return RateRegion(members)


def restricted_region(region: RateRegion, j: np.ndarray) -> RateRegion:
    """R(j, h) from R(1, h): zero the OFF rows and drop duplicates.

    Restricting is idempotent and monotone: a smaller activation vector can
    only shrink the region, and the zero matrix always survives.
    """
    j = np.asarray(j).reshape(1, -1, 1)
    return RateRegion(_dedupe_members(region.members * j))


class RegionTable:
    """Cache of regions per (activation, channel state) for one scenario."""

    def __init__(self, cfg: NetworkConfig, cm: ChannelModel):
        self.cfg = cfg
        self.cm = cm
        self._full: dict[int, RateRegion] = {}
        self._restricted: dict[tuple[int, int], RateRegion] = {}

    def full(self, h_index: int) -> RateRegion:
        if h_index not in self._full:
            self._full[h_index] = full_region(self.cm, self.cfg, h_index)
        return self._full[h_index]

    def restricted(self, j: np.ndarray, h_index: int) -> RateRegion:
        key = (activation_id(j), h_index)
        if key not in self._restricted:
            self._restricted[key] = restricted_region(self.full(h_index), j)
        return self._restricted[key]


def reference_scenario() -> tuple[NetworkConfig, ChannelModel]:
    """Bundled 5-user, 3-station benchmark network.

    Stations 0 and 2 each cover three users, station 1 covers four; users
    0, 1 (stations 0, 1), users 2, 3 (stations 1, 2) and user 4
    (stations 0, 2) are each covered twice. Arrivals are Bernoulli(0.1) on
    every link. The channel has four equally likely states: all links bad
    (rate 1), or exactly one station "good" with rate 2 on its links.
    Switching-off and per-slot activity both cost 1.
    """
    n_users, n_stations = 5, 3
    adjacency = (
        (0, 0), (0, 1), (0, 4),
        (1, 0), (1, 1), (1, 2), (1, 3),
        (2, 2), (2, 3), (2, 4),
    )
    rates = np.zeros((n_stations, n_users))
    for m, u in adjacency:
        rates[m, u] = 0.1
    cfg = NetworkConfig(
        n_users=n_users,
        n_stations=n_stations,
        adjacency=adjacency,
        arrival_rates=rates,
        max_arrivals=1,
        max_rate=2,
        switch_off_cost=1.0,
        active_cost=1.0,
    )
    mask = cfg.adjacency_mask()

    def state(name: str, good_station: int | None) -> ChannelState:
        r = np.where(mask, 1, 0)
        if good_station is not None:
            r[good_station] = np.where(mask[good_station], 2, 0)
        return ChannelState(name=name, rates=r.astype(np.int64))

    states = (
        state("all_bad", None),
        state("good_station_0", 0),
        state("good_station_1", 1),
        state("good_station_2", 2),
    )
    cm = ChannelModel(states=states, pmf=np.full(4, 0.25))
    return cfg, cm
