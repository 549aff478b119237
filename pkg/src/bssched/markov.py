"""Mixing analysis for the activation chains driven by resampling policies.

The central quantity is the coefficient of ergodicity of a row-stochastic
matrix P,

    tau1(P) = 0.5 * max_{i,k} sum_j |P[i,j] - P[k,j]|,

the L1 operator norm of P restricted to zero-sum row vectors. It is
submultiplicative, 1-Lipschitz in the max-row-sum norm, contracts the L1
distance between any two distributions pushed through P, and is < 1 exactly
when P is scrambling (every pair of rows shares a positive column).

Vector norms here are L1; the matrix norm written ||A||_1 is the maximum
absolute row sum, which is the norm induced by L1 on row vectors acting by
right multiplication.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _check_stochastic(p: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValueError("transition matrix must be square")
    if np.any(p < -tol):
        raise ValueError("transition matrix has negative entries")
    if np.any(np.abs(p.sum(axis=1) - 1.0) > max(tol, 1e-9 * p.shape[0])):
        raise ValueError("transition matrix rows must sum to 1")
    return p


def _check_pmf(v: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or np.any(v < -tol) or abs(v.sum() - 1.0) > tol:
        raise ValueError("expected a probability vector")
    return v


def tau1(p: np.ndarray) -> float:
    """Coefficient of ergodicity: half the largest pairwise row L1 distance.

    The maximum of ||z P||_1 over zero-sum z with ||z||_1 = 1 is attained at
    an extreme point z = (e_i - e_k) / 2, which gives this closed form.
    """
    p = _check_stochastic(p)
    diffs = np.abs(p[:, None, :] - p[None, :, :]).sum(axis=2)
    return float(diffs.max()) / 2.0


def p_sigma_eps(sigma: np.ndarray, eps: float) -> np.ndarray:
    """Resample-or-hold transition matrix: draw from sigma w.p. eps, else stay.

    P = eps * 1 sigma^T + (1 - eps) * I. Its powers stay in the same family:
    P^l = (1 - (1-eps)^l) 1 sigma^T + (1-eps)^l I, so tau1(P^l) = (1-eps)^l
    and the tau1 series sums to 1/eps.
    """
    sigma = _check_pmf(sigma)
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    n = sigma.shape[0]
    return eps * np.tile(sigma, (n, 1)) + (1.0 - eps) * np.eye(n)


def is_scrambling(p: np.ndarray, tol: float = 0.0) -> bool:
    """True when every pair of rows shares a column with positive mass."""
    p = _check_stochastic(p)
    positive = p > tol
    shared = positive.astype(int) @ positive.astype(int).T
    return bool(np.all(shared > 0))


def find_scrambling_power(p: np.ndarray, max_power: int = 1024) -> int | None:
    """Smallest k with P^k scrambling, or None if none up to max_power."""
    p = _check_stochastic(p)
    power = np.eye(p.shape[0])
    for k in range(1, max_power + 1):
        power = power @ p
        if is_scrambling(power):
            return k
    return None


def tau1_series_sum(
    p: np.ndarray,
    tail_tol: float = 1e-12,
    max_power: int = 1024,
) -> float:
    """Sum of tau1(P^l) over l >= 0, a geometric-mixing constant.

    Requires some power of P to be scrambling (checked up to ``max_power``),
    which makes the series geometrically convergent. Summation stops once
    the remaining tail is provably below ``tail_tol``, using the bound
    tail(k) <= tau1(P^k) * m / (1 - tau1(P^m)) with m the scrambling power.
    """
    p = _check_stochastic(p)
    m_hat = find_scrambling_power(p, max_power=max_power)
    if m_hat is None:
        raise ValueError(
            f"no power of the chain up to {max_power} is scrambling; "
            "the tau1 series may diverge"
        )
    p_m = np.linalg.matrix_power(p, m_hat)
    tau_m = tau1(p_m)
    total = 0.0
    power = np.eye(p.shape[0])
    term = tau1(power)
    while True:
        total += term
        if term * m_hat / (1.0 - tau_m) < tail_tol:
            return total
        power = power @ p
        term = tau1(power)


def tau1_series_bound(p: np.ndarray, max_power: int = 1024) -> float:
    """Closed-form upper bound on the tau1 series: m / (1 - tau1(P^m))."""
    p = _check_stochastic(p)
    m_hat = find_scrambling_power(p, max_power=max_power)
    if m_hat is None:
        raise ValueError(f"no scrambling power up to {max_power}")
    tau_m = tau1(np.linalg.matrix_power(p, m_hat))
    return m_hat / (1.0 - tau_m)


def stationary_distribution(p: np.ndarray) -> np.ndarray:
    """Stationary row vector of P via the normalized null space of P^T - I."""
    p = _check_stochastic(p)
    n = p.shape[0]
    a = np.vstack([p.T - np.eye(n), np.ones((1, n))])
    b = np.concatenate([np.zeros(n), [1.0]])
    sigma, *_ = np.linalg.lstsq(a, b, rcond=None)
    sigma = np.maximum(sigma, 0.0)
    return sigma / sigma.sum()


@dataclass(frozen=True)
class PerturbedChain:
    """Nominal chain plus a perturbation radius for its step kernels.

    Models marginals evolved by time-varying kernels P_l with
    ||P_l - p_star||_1 <= epsilon (max absolute row sum) from start pmf y0;
    sigma_star is the stationary distribution of p_star.
    """

    p_star: np.ndarray
    sigma_star: np.ndarray
    epsilon: float
    y0: np.ndarray

    def __post_init__(self):
        p = _check_stochastic(self.p_star)
        sigma = _check_pmf(self.sigma_star)
        _check_pmf(self.y0)
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if np.abs(sigma @ p - sigma).sum() > 1e-8:
            raise ValueError("sigma_star is not stationary for p_star")

    def deviation_bound(self, n_steps: int) -> np.ndarray:
        return marginal_deviation_bound(
            self.p_star, self.sigma_star, self.y0, self.epsilon, n_steps
        )


def marginal_deviation_bound(
    p_star: np.ndarray,
    sigma_star: np.ndarray,
    y0: np.ndarray,
    epsilon: float,
    n_steps: int,
) -> np.ndarray:
    """Per-step bound on ||y(n) - sigma_star||_1 under perturbed kernels.

    If y(n) = y(n-1) P_n with every step kernel within epsilon of p_star in
    max-row-sum norm, then for n = 1..n_steps

        ||y(n) - sigma_star||_1
            <= tau1(p_star^n) ||y0 - sigma_star||_1
               + epsilon * sum_{l=0}^{n-1} tau1(p_star^l).

    Returns the array of bounds for n = 1..n_steps.
    """
    p_star = _check_stochastic(p_star)
    sigma_star = _check_pmf(sigma_star)
    y0 = _check_pmf(y0)
    d0 = float(np.abs(y0 - sigma_star).sum())
    taus = np.empty(n_steps + 1)
    power = np.eye(p_star.shape[0])
    taus[0] = tau1(power)
    for l in range(1, n_steps + 1):
        power = power @ p_star
        taus[l] = tau1(power)
    partial = np.cumsum(taus)  # partial[n-1] = sum_{l<n} tau1(P^l)
    return taus[1:] * d0 + epsilon * partial[:-1]
