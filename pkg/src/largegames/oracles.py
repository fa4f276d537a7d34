"""Query oracles: counted pure-profile queries, sampled mixed-profile
estimates, and exact mixed expectations.

A session owns a seeded random stream and monotone counters, so a fixed
seed and call sequence reproduces every estimate bit for bit.  Pure
queries are the unit of query complexity; exact mixed queries are
counted separately because they are a testing convenience, not part of
the query budget.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .games import Game, MixedProfile, mixed_payoff_table


def binary_sample_count(beta: float, delta: float, n: int) -> int:
    """Number of pure queries one binary mixed estimate spends."""
    _check_params(beta, delta)
    return math.ceil(64.0 / beta ** 3 * math.log(8.0 * n / delta))


def kaction_sample_count(beta: float, delta: float, n: int, k: int) -> int:
    """Number of pure queries one k-action mixed estimate spends."""
    _check_params(beta, delta)
    return math.ceil(64.0 * k * k / beta ** 3 * math.log(8.0 * n / delta))


def blend_binary(p_one: np.ndarray, beta: float) -> np.ndarray:
    """Mix each P[action 1] with the uniform coin: (1 - beta/2) p + beta/4."""
    return (1.0 - beta / 2.0) * np.asarray(p_one, dtype=float) + beta / 4.0


def blend_kaction(probs: np.ndarray, beta: float) -> np.ndarray:
    """Mix each row with the uniform distribution over the k actions."""
    k = probs.shape[1]
    return (1.0 - beta / 2.0) * probs + beta / (2.0 * k)


def _check_params(beta: float, delta: float):
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie in (0, 1)")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")


class StochasticGame(Game):
    """A game whose stated payoffs are means of per-profile distributions.

    Queries return one independent draw per player; the deterministic
    view (``payoffs`` and the exact mixed table) exposes the means.  The
    default and only distribution kind is Bernoulli(mean), the extremal
    distribution on [0, 1].
    """

    def __init__(self, base: Game, kind: str = "bernoulli"):
        if kind != "bernoulli":
            raise ValueError("unsupported distribution kind")
        self.base = base
        self.kind = kind
        self.n, self.k, self.c = base.n, base.k, base.c

    is_stochastic = True

    def payoffs(self, actions) -> np.ndarray:
        return self.base.payoffs(actions)

    def payoffs_batch(self, actions: np.ndarray) -> np.ndarray:
        return self.base.payoffs_batch(actions)

    @property
    def has_fast_expectation(self) -> bool:
        return self.base.has_fast_expectation

    def mixed_payoff_table(self, profile: MixedProfile) -> np.ndarray:
        return self.base.mixed_payoff_table(profile)

    def sample_payoffs_batch(self, actions: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        means = self.base.payoffs_batch(actions)
        return (rng.random(means.shape) < means).astype(float)


@dataclass(frozen=True)
class MixedEstimate:
    """Sampled estimates of expected payoffs at a blended mixed profile.

    ``values[i, j]`` averages player i's sampled payoffs over the queries
    where she played j; cells never observed are exactly 0.  The blended
    profile actually sampled is kept so the estimate can be compared with
    the exact expectations it is unbiased for.
    """

    values: np.ndarray         # (n, k)
    samples: int
    beta: float
    delta: float
    p_prime: np.ndarray        # (n, k) blended profile the queries were drawn from
    counts: np.ndarray         # (n, k) observations per cell

    def player_view(self, player: int) -> np.ndarray:
        """The one row a player learns about in the uncoupled setting."""
        return self.values[player].copy()


class OracleSession:
    """Query access to one game with counting, seeding and optional tracing.

    A session is single-owner: counters and the random stream mutate with
    each call.  Distinct sessions with distinct seeds are independent.
    With ``uncoupled=True`` pure queries must name the calling player and
    return only that player's payoff.
    """

    def __init__(self, game: Game, seed: int = 0, uncoupled: bool = False,
                 trace_path=None):
        self.game = game
        self.seed = seed
        self.uncoupled = uncoupled
        self.rng = np.random.default_rng(seed)
        self.pure_queries = 0
        self.qm_calls = 0
        self._trace = open(trace_path, "w") if trace_path else None

    # -- pure queries -------------------------------------------------

    def query_pure(self, actions, player: int | None = None):
        """One pure-profile query; stochastic games return a fresh draw."""
        if self.uncoupled and player is None:
            raise ValueError("uncoupled sessions reveal payoffs per calling player")
        payoffs = self._pure_batch(np.asarray(actions, dtype=np.int64)[None, :])[0]
        if player is not None:
            return float(payoffs[player])
        return payoffs

    def _pure_batch(self, actions: np.ndarray) -> np.ndarray:
        if actions.ndim != 2 or actions.shape[1] != self.game.n:
            raise ValueError("batch must have shape (S, n)")
        if actions.size and (actions.min() < 0 or actions.max() >= self.game.k):
            raise ValueError("actions out of range")
        if getattr(self.game, "is_stochastic", False):
            payoffs = self.game.sample_payoffs_batch(actions, self.rng)
        else:
            payoffs = self.game.payoffs_batch(actions)
        self.pure_queries += actions.shape[0]
        if self._trace is not None:
            start = self.pure_queries - actions.shape[0]
            for off, (a, u) in enumerate(zip(actions, payoffs)):
                self._trace.write(json.dumps(
                    {"t": start + off, "profile": a.tolist(), "payoffs": u.tolist()}) + "\n")
        return payoffs

    # -- sampled mixed estimates ---------------------------------------

    _CHUNK = 4096  # rows per sampling block; keeps temporaries cache-friendly

    def sample_mixed_binary(self, profile: MixedProfile, beta: float, delta: float) -> MixedEstimate:
        """Estimate E[u_i(j, .)] by sampling pure profiles from the blend of ``profile``."""
        if self.game.k != 2:
            raise ValueError("binary sampling requires k = 2")
        n_queries = binary_sample_count(beta, delta, self.game.n)
        p_one = blend_binary(profile.binary(), beta)
        p_prime = np.column_stack([1.0 - p_one, p_one])

        def draw(m):
            return (self.rng.random((m, self.game.n)) < p_one).astype(np.int8)

        return self._estimate_from_queries(n_queries, draw, p_prime, beta, delta)

    def sample_mixed_kaction(self, profile: MixedProfile, beta: float, delta: float) -> MixedEstimate:
        if self.game.k < 2:
            raise ValueError("need at least two actions")
        n_queries = kaction_sample_count(beta, delta, self.game.n, self.game.k)
        p_prime = blend_kaction(profile.probs, beta)
        cdf = np.cumsum(p_prime, axis=1)

        def draw(m):
            draws = self.rng.random((m, self.game.n))
            return (draws[:, :, None] > cdf[None, :, :-1]).sum(axis=2).astype(np.int8)

        return self._estimate_from_queries(n_queries, draw, p_prime, beta, delta)

    def _estimate_from_queries(self, n_queries, draw, p_prime, beta, delta) -> MixedEstimate:
        n, k = self.game.n, self.game.k
        counts = np.zeros((n, k))
        sums = np.zeros((n, k))
        done = 0
        while done < n_queries:
            actions = draw(min(self._CHUNK, n_queries - done))
            payoffs = self._pure_batch(actions)
            if k == 2:
                ones = actions.sum(axis=0, dtype=np.int64)
                counts[:, 1] += ones
                counts[:, 0] += actions.shape[0] - ones
                paid_ones = (payoffs * actions).sum(axis=0)
                sums[:, 1] += paid_ones
                sums[:, 0] += payoffs.sum(axis=0) - paid_ones
            else:
                for j in range(k):
                    mask = actions == j
                    counts[:, j] += mask.sum(axis=0)
                    sums[:, j] += (payoffs * mask).sum(axis=0)
            done += actions.shape[0]
        values = np.where(counts > 0, sums / np.maximum(counts, 1.0), 0.0)
        return MixedEstimate(values=values, samples=n_queries, beta=beta,
                             delta=delta, p_prime=p_prime, counts=counts)

    # -- exact mixed queries -------------------------------------------

    def exact_mixed(self, profile: MixedProfile) -> np.ndarray:
        """Exact expected payoff table u_i(j, p_-i); counted apart from pure queries."""
        self.qm_calls += 1
        return mixed_payoff_table(self.game, profile)

    def close(self):
        if self._trace is not None:
            self._trace.close()
            self._trace = None
