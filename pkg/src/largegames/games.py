"""Core game representations and exact ground-truth verifiers.

A game here is an n-player, k-action payoff structure with utilities in
[0, 1] and a declared influence budget c: no single opponent's action
switch may move a player's payoff by more than gamma = c/n.  This module
provides the exact evaluators (pure profiles, expected payoffs under
mixed profiles) and the verifiers (regret, discrepancy, approximate-NE,
well-supported NE, largeness) that every algorithm in the package is
tested against.

All types are immutable after construction and every operation is pure,
so values can be shared freely across threads.
"""

from __future__ import annotations

import itertools
import json
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

SUPPORT_EPS = 1e-12          # probability mass below this does not count as support
PROB_TOL = 1e-12             # tolerance for "rows sum to one"
LARGENESS_TOL = 1e-12
ENUMERATION_GUARD = 2 ** 24  # max joint opponent support for brute-force expectation


class CapabilityError(RuntimeError):
    """An operation was asked of a game that cannot support it."""


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class MixedProfile:
    """Per-player probability vectors over the k actions.

    ``probs`` has shape (n, k); row i is player i's mixed strategy.  For
    binary games the scalar convenience accessors work with the single
    probability of action 1.
    """

    probs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.probs, dtype=float)
        if arr.ndim != 2:
            raise ValueError("mixed profile must be an (n, k) matrix")
        if np.any(arr < -PROB_TOL):
            raise ValueError("probabilities must be nonnegative")
        sums = arr.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > PROB_TOL):
            raise ValueError("each player's probabilities must sum to 1")
        object.__setattr__(self, "probs", _readonly(np.clip(arr, 0.0, None)))

    @property
    def n(self) -> int:
        return self.probs.shape[0]

    @property
    def k(self) -> int:
        return self.probs.shape[1]

    @classmethod
    def uniform(cls, n: int, k: int = 2) -> "MixedProfile":
        return cls(np.full((n, k), 1.0 / k))

    @classmethod
    def from_binary(cls, p_one) -> "MixedProfile":
        """Build a binary profile from the vector of P[action = 1]."""
        p = np.asarray(p_one, dtype=float)
        if p.ndim != 1:
            raise ValueError("binary profile vector must be 1-d")
        if np.any(p < -PROB_TOL) or np.any(p > 1.0 + PROB_TOL):
            raise ValueError("binary probabilities must lie in [0, 1]")
        p = np.clip(p, 0.0, 1.0)
        return cls(np.column_stack([1.0 - p, p]))

    @classmethod
    def pure(cls, actions, k: int) -> "MixedProfile":
        a = np.asarray(actions, dtype=int)
        mat = np.zeros((a.shape[0], k))
        mat[np.arange(a.shape[0]), a] = 1.0
        return cls(mat)

    def binary(self) -> np.ndarray:
        if self.k != 2:
            raise ValueError("binary view requires k = 2")
        return self.probs[:, 1].copy()

    def support(self) -> np.ndarray:
        return self.probs > SUPPORT_EPS


def as_pure_profile(actions, n: int, k: int) -> np.ndarray:
    arr = np.asarray(actions, dtype=np.int64)
    if arr.shape != (n,):
        raise ValueError(f"profile must have length {n}, got shape {arr.shape}")
    if arr.size and (arr.min() < 0 or arr.max() >= k):
        raise ValueError(f"actions must lie in [0, {k})")
    return arr


class Game(ABC):
    """An n-player, k-action game evaluable on pure profiles.

    Subclasses must fill ``n``, ``k``, ``c`` and implement ``payoffs``.
    Games whose expected payoffs have a closed multilinear form should
    also implement ``mixed_payoff_table`` and report
    ``has_fast_expectation = True``; everything else falls back to
    brute-force enumeration over the opponents' joint support.
    """

    n: int
    k: int
    c: float

    @property
    def gamma(self) -> float:
        return self.c / self.n

    @abstractmethod
    def payoffs(self, actions) -> np.ndarray:
        """Payoff vector (length n) for one pure profile."""

    def payoff(self, player: int, actions) -> float:
        return float(self.payoffs(actions)[player])

    def payoffs_batch(self, actions: np.ndarray) -> np.ndarray:
        """Payoffs for a (S, n) batch of pure profiles; returns (S, n)."""
        return np.stack([self.payoffs(row) for row in actions])

    @property
    def has_fast_expectation(self) -> bool:
        return False

    def mixed_payoff_table(self, profile: MixedProfile) -> np.ndarray:
        raise CapabilityError(f"{type(self).__name__} has no fast expectation path")


class TensorGame(Game):
    """Explicit payoff tensor, shape (n,) + (k,) * n."""

    def __init__(self, tensor: np.ndarray, c: float):
        tensor = np.asarray(tensor, dtype=float)
        n = tensor.shape[0]
        if tensor.ndim != n + 1 or any(s != tensor.shape[1] for s in tensor.shape[1:]):
            raise ValueError("tensor must have shape (n,) + (k,) * n")
        if tensor.size and (tensor.min() < -PROB_TOL or tensor.max() > 1 + PROB_TOL):
            raise ValueError("payoffs must lie in [0, 1]")
        self.tensor = _readonly(tensor)
        self.n = n
        self.k = tensor.shape[1]
        self.c = float(c)

    def payoffs(self, actions) -> np.ndarray:
        a = as_pure_profile(actions, self.n, self.k)
        return self.tensor[(slice(None), *a)].copy()

    def payoffs_batch(self, actions: np.ndarray) -> np.ndarray:
        idx = tuple(actions[:, j] for j in range(self.n))
        return self.tensor[(slice(None), *idx)].T.copy()

    @property
    def has_fast_expectation(self) -> bool:
        return True

    def mixed_payoff_table(self, profile: MixedProfile) -> np.ndarray:
        p = profile.probs
        table = np.empty((self.n, self.k))
        for i in range(self.n):
            t = self.tensor[i]
            # contract opponents from the highest axis down so lower axes keep position
            for axis in range(self.n - 1, -1, -1):
                if axis != i:
                    t = np.tensordot(t, p[axis], axes=(axis, 0))
            table[i] = t
        return table

    def to_json(self) -> str:
        return json.dumps(
            {"n": self.n, "k": self.k, "c": self.c,
             "payoffs": [float(x) for x in self.tensor.ravel(order="C")]},
            sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TensorGame":
        obj = json.loads(text)
        n, k = int(obj["n"]), int(obj["k"])
        flat = np.asarray(obj["payoffs"], dtype=float)
        if flat.size != n * k ** n:
            raise ValueError("payoff table has wrong length")
        return cls(flat.reshape((n,) + (k,) * n), float(obj["c"]))


class IndependentGame(Game):
    """Each player's payoff depends only on her own action: u_i(a) = values[i, a_i]."""

    def __init__(self, values: np.ndarray, c: float = 0.0):
        values = np.asarray(values, dtype=float)
        if values.ndim != 2:
            raise ValueError("values must be an (n, k) matrix")
        if values.min() < 0 or values.max() > 1:
            raise ValueError("payoffs must lie in [0, 1]")
        self.values = _readonly(values)
        self.n, self.k = values.shape
        self.c = float(c)

    def payoffs(self, actions) -> np.ndarray:
        a = as_pure_profile(actions, self.n, self.k)
        return self.values[np.arange(self.n), a].copy()

    def payoffs_batch(self, actions: np.ndarray) -> np.ndarray:
        return self.values[np.arange(self.n)[None, :], actions]

    @property
    def has_fast_expectation(self) -> bool:
        return True

    def mixed_payoff_table(self, profile: MixedProfile) -> np.ndarray:
        return self.values.copy()


def independent_binary_game(n: int, hi: float = 0.7, lo: float = 0.3, c: float = 1.0) -> IndependentGame:
    """Binary game paying hi for action 1 and lo for action 0, no cross influence."""
    return IndependentGame(np.tile([lo, hi], (n, 1)), c=c)


def constant_game(n: int, k: int = 2, value: float = 0.5, c: float = 1.0) -> IndependentGame:
    return IndependentGame(np.full((n, k), value), c=c)


# ---------------------------------------------------------------------------
# expected payoffs

def _check_profile(game: Game, profile: MixedProfile) -> MixedProfile:
    if profile.n != game.n or profile.k != game.k:
        raise ValueError("profile shape does not match game")
    return profile


def _enumerated_cell(game: Game, probs: np.ndarray, player: int, action: int) -> float:
    # exact zero test: dropping sub-threshold mass would bias the expectation
    supports = [np.nonzero(probs[l] > 0.0)[0] for l in range(game.n)]
    joint = 1
    for l in range(game.n):
        if l != player:
            joint *= len(supports[l])
    if joint > ENUMERATION_GUARD:
        raise CapabilityError(f"joint opponent support {joint} exceeds {ENUMERATION_GUARD}")
    a = np.zeros(game.n, dtype=np.int64)
    a[player] = action
    others = [l for l in range(game.n) if l != player]
    total = 0.0
    for combo in itertools.product(*(supports[l] for l in others)):
        w = 1.0
        for l, al in zip(others, combo):
            a[l] = al
            w *= probs[l][al]
        total += w * game.payoff(player, a)
    return total


def expected_payoff(game: Game, profile: MixedProfile, player: int, action: int) -> float:
    """E[u_player(action, a_-player)] with opponents drawn from the profile."""
    _check_profile(game, profile)
    if not 0 <= player < game.n:
        raise ValueError("player out of range")
    if not 0 <= action < game.k:
        raise ValueError("action out of range")
    if game.has_fast_expectation:
        return float(game.mixed_payoff_table(profile)[player, action])
    return _enumerated_cell(game, profile.probs, player, action)


def mixed_payoff_table(game: Game, profile: MixedProfile) -> np.ndarray:
    """Matrix of expected payoffs, entry (i, j) = E[u_i(j, a_-i)]."""
    _check_profile(game, profile)
    if game.has_fast_expectation:
        return game.mixed_payoff_table(profile)
    return np.array([[_enumerated_cell(game, profile.probs, i, j)
                      for j in range(game.k)] for i in range(game.n)])


# ---------------------------------------------------------------------------
# verifiers

def eval_pure(game: Game, actions) -> np.ndarray:
    """Payoff vector for one pure profile."""
    return game.payoffs(as_pure_profile(actions, game.n, game.k))


def regrets_from_table(table: np.ndarray, probs: np.ndarray) -> np.ndarray:
    current = np.sum(table * probs, axis=1)
    return np.maximum(table.max(axis=1) - current, 0.0)


def regret(game: Game, profile: MixedProfile, player: int) -> float:
    """Best achievable expected payoff minus current expected payoff."""
    table = mixed_payoff_table(game, profile)
    return float(regrets_from_table(table, profile.probs)[player])


def discrepancy(game: Game, profile: MixedProfile, player: int) -> float:
    """|E[u_i(0, .)] - E[u_i(1, .)]| for binary games."""
    if game.k != 2:
        raise ValueError("discrepancy is defined for binary games only")
    table = mixed_payoff_table(game, profile)
    return float(abs(table[player, 0] - table[player, 1]))


@dataclass(frozen=True)
class StrategyPayoffState:
    """The triple (payoff of action 1, payoff of action 0, P[action 1])."""

    v1: float
    v0: float
    p: float

    def __post_init__(self):
        for name in ("v1", "v0", "p"):
            x = getattr(self, name)
            if not -PROB_TOL <= x <= 1 + PROB_TOL:
                raise ValueError(f"{name} must lie in [0, 1]")

    @property
    def discrepancy(self) -> float:
        return abs(self.v1 - self.v0)

    @property
    def best_response_mass(self) -> float:
        return self.p if self.v1 >= self.v0 else 1.0 - self.p

    @property
    def regret(self) -> float:
        return self.discrepancy * (1.0 - self.best_response_mass)


def strategy_payoff_state(game: Game, profile: MixedProfile, player: int) -> StrategyPayoffState:
    if game.k != 2:
        raise ValueError("strategy/payoff states are defined for binary games only")
    table = mixed_payoff_table(game, profile)
    return StrategyPayoffState(v1=float(table[player, 1]), v0=float(table[player, 0]),
                               p=float(profile.probs[player, 1]))


@dataclass(frozen=True)
class RegretReport:
    """Per-player regret diagnostics for one mixed profile."""

    regrets: np.ndarray          # (n,)
    gaps: np.ndarray             # (n, k) best-response payoff minus action payoff
    support: np.ndarray          # (n, k) bool, probability above the support threshold
    discrepancies: np.ndarray | None  # (n,) for binary games, else None

    @property
    def max_regret(self) -> float:
        return float(self.regrets.max())

    @property
    def wsne_slack(self) -> float:
        """Largest optimality gap over supported actions."""
        return float(self.gaps[self.support].max())

    def to_dict(self) -> dict:
        out = {
            "regrets": [float(x) for x in self.regrets],
            "max_regret": self.max_regret,
            "wsne_slack": self.wsne_slack,
        }
        if self.discrepancies is not None:
            out["discrepancies"] = [float(x) for x in self.discrepancies]
        return out


def regret_report(game: Game, profile: MixedProfile) -> RegretReport:
    table = mixed_payoff_table(game, profile)
    best = table.max(axis=1)
    gaps = best[:, None] - table
    regs = regrets_from_table(table, profile.probs)
    disc = np.abs(table[:, 0] - table[:, 1]) if game.k == 2 else None
    return RegretReport(regrets=regs, gaps=gaps, support=profile.support(),
                        discrepancies=disc)


def is_approx_ne(game: Game, profile: MixedProfile, eps: float):
    """(max regret <= eps, full report)."""
    report = regret_report(game, profile)
    return bool(report.max_regret <= eps), report


def is_wsne(game: Game, profile: MixedProfile, eps: float) -> bool:
    """True iff every supported action is strictly within eps of the best response."""
    report = regret_report(game, profile)
    return bool(report.wsne_slack < eps)


@dataclass(frozen=True)
class LargenessReport:
    ok: bool
    gamma: float
    worst: float                 # largest payoff change from a unilateral opponent switch
    witness: tuple | None        # (profile, victim, deviator, new action)
    tested: int

    @property
    def excess(self) -> float:
        return max(self.worst - self.gamma, 0.0)


def check_largeness(game: Game, gamma: float, mode: str = "exhaustive",
                    trials: int = 10_000, seed: int = 0) -> LargenessReport:
    """Verify that unilateral opponent deviations move payoffs by at most gamma.

    ``exhaustive`` scans every profile and deviation (allowed only while
    k^n <= 2^20); ``sampled`` draws random (profile, deviator, action)
    triples from a seeded generator.
    """
    worst = 0.0
    witness = None
    tested = 0
    if mode == "exhaustive":
        if game.k ** game.n > 2 ** 20:
            raise CapabilityError("profile space too large for exhaustive largeness check")
        for a in itertools.product(range(game.k), repeat=game.n):
            base = game.payoffs(np.array(a))
            for j in range(game.n):
                for alt in range(game.k):
                    if alt == a[j]:
                        continue
                    dev = np.array(a)
                    dev[j] = alt
                    moved = game.payoffs(dev)
                    tested += 1
                    for i in range(game.n):
                        if i == j:
                            continue
                        change = abs(moved[i] - base[i])
                        if change > worst:
                            worst = change
                            witness = (tuple(a), i, j, alt)
    elif mode == "sampled":
        rng = np.random.default_rng(seed)
        for _ in range(trials):
            a = rng.integers(0, game.k, size=game.n)
            j = int(rng.integers(game.n))
            alt = int((a[j] + 1 + rng.integers(game.k - 1)) % game.k)
            base = game.payoffs(a)
            dev = a.copy()
            dev[j] = alt
            moved = game.payoffs(dev)
            tested += 1
            diff = np.abs(moved - base)
            diff[j] = 0.0
            i = int(np.argmax(diff))
            if diff[i] > worst:
                worst = float(diff[i])
                witness = (tuple(int(x) for x in a), i, j, alt)
    else:
        raise ValueError("mode must be 'exhaustive' or 'sampled'")
    return LargenessReport(ok=bool(worst <= gamma + LARGENESS_TOL), gamma=gamma,
                           worst=worst, witness=witness, tested=tested)
