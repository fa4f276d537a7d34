"""Seeded generators of small-influence games with known structure.

Every family is a pure function of (parameters, seed), carries a
declared influence budget c (gamma = c/n), and the first two expose a
closed multilinear form for expected payoffs so exact verification
scales to large player counts.
"""

from __future__ import annotations

import json

import numpy as np

from .games import (
    Game,
    IndependentGame,
    MixedProfile,
    TensorGame,
    as_pure_profile,
    _readonly,
)
from .oracles import StochasticGame


class LinearInfluenceGame(Game):
    """Own-action base payoff plus averaged pairwise influence terms.

    u_i(a) = (1 - mu) base_i(a_i) + mu / (n - 1) * sum_{j != i} w_ij(a_i, a_j)
    with mu = min(1, c (n - 1) / n), so any single opponent switch moves
    u_i by at most mu / (n - 1) <= c / n.  Expected payoffs are linear in
    each opponent's distribution, giving an exact mixed table in
    O(n^2 k^2).
    """

    def __init__(self, base: np.ndarray, weights: np.ndarray, c: float):
        base = np.asarray(base, dtype=float)
        weights = np.asarray(weights, dtype=float)
        n, k = base.shape
        if weights.shape != (n, n, k, k):
            raise ValueError("weights must have shape (n, n, k, k)")
        weights = weights.copy()
        weights[np.arange(n), np.arange(n)] = 0.0  # no self influence
        self.base = _readonly(base)
        self.weights = _readonly(weights)
        self.n, self.k = n, k
        self.c = float(c)
        self.mu = min(1.0, c * (n - 1) / n)
        # batch-path precomputation: action-0 row sums plus per-action deltas,
        # flattened so the batch evaluation is one GEMM per opponent action
        self._batch_zero = _readonly(weights[:, :, :, 0].sum(axis=1))
        delta = (weights - weights[:, :, :, :1]).transpose(1, 0, 2, 3)
        self._delta_flat = [np.ascontiguousarray(delta[:, :, :, b].reshape(n, n * k))
                            for b in range(k)]
        if k == 2:
            self._d_col = [np.ascontiguousarray(delta[:, :, j, 1]) for j in range(2)]

    def payoffs(self, actions) -> np.ndarray:
        a = as_pure_profile(actions, self.n, self.k)
        idx = np.arange(self.n)
        pair = self.weights[idx[:, None], idx[None, :], a[:, None], a[None, :]]
        influence = pair.sum(axis=1)  # diagonal is zero by construction
        return (1.0 - self.mu) * self.base[idx, a] + self.mu / (self.n - 1) * influence

    def payoffs_batch(self, actions: np.ndarray) -> np.ndarray:
        n, k = self.n, self.k
        scale = self.mu / (n - 1)
        if k == 2:
            x = actions.astype(np.float64)
            # g_j[s, i] = sum_l w[i, l, j, a_sl]
            g0 = x @ self._d_col[0]
            g0 += self._batch_zero[:, 0]
            g1 = x @ self._d_col[1]
            g1 += self._batch_zero[:, 1]
            own = g0
            own += x * (g1 - g0)
            base_own = self.base[:, 0] + x * (self.base[:, 1] - self.base[:, 0])
            out = base_own
            out *= 1.0 - self.mu
            out += scale * own
            return out
        s = actions.shape[0]
        # received[s, i, j] = sum_l w[i, l, j, a_sl], one GEMM per action
        flat = None
        for b in range(1, k):
            contrib = (actions == b).astype(np.float64) @ self._delta_flat[b]
            flat = contrib if flat is None else flat + contrib
        received = flat.reshape(s, n, k)
        received += self._batch_zero
        own = np.zeros(actions.shape, dtype=float)
        base_own = np.zeros(actions.shape, dtype=float)
        for j in range(k):
            mask = actions == j
            own += received[:, :, j] * mask
            base_own += self.base[None, :, j] * mask
        return (1.0 - self.mu) * base_own + scale * own

    @property
    def has_fast_expectation(self) -> bool:
        return True

    def mixed_payoff_table(self, profile: MixedProfile) -> np.ndarray:
        mixed = np.einsum("iljb,lb->ij", self.weights, profile.probs)
        return (1.0 - self.mu) * self.base + self.mu / (self.n - 1) * mixed


def gen_linear_influence(n: int, k: int, c: float, seed: int) -> LinearInfluenceGame:
    """Seeded random base payoffs and pairwise influence weights, all uniform on [0, 1]."""
    if n < 2 or k < 2:
        raise ValueError("need n >= 2 players and k >= 2 actions")
    if not 0.0 <= c <= n:
        raise ValueError("influence budget c must lie in [0, n]")
    rng = np.random.default_rng(seed)
    base = rng.random((n, k))
    weights = rng.random((n, n, k, k))
    return LinearInfluenceGame(base, weights, c)


class LowerBoundGame(IndependentGame):
    """Independent Bernoulli-mean game hiding a pure equilibrium bit vector.

    Player i's action b_i has mean (ell - 1) / ell and the other action
    mean 1 / ell, so playing 1 - b_i surely costs (ell - 2) / ell.
    Payoffs ignore opponents entirely, which makes the game 1/n-large
    for free.
    """

    def __init__(self, bits: np.ndarray, ell: float):
        if ell <= 2:
            raise ValueError("ell must exceed 2")
        bits = np.asarray(bits, dtype=np.int64)
        n = bits.shape[0]
        values = np.full((n, 2), 1.0 / ell)
        values[np.arange(n), bits] = (ell - 1.0) / ell
        super().__init__(values, c=1.0)
        self.bits = bits.copy()
        self.bits.setflags(write=False)
        self.ell = float(ell)

    @property
    def gap(self) -> float:
        return (self.ell - 2.0) / self.ell


def gen_lower_bound(n: int, ell: float, seed_for_b: int) -> StochasticGame:
    """Stochastic-utility game G_b with b drawn from the seed."""
    rng = np.random.default_rng(seed_for_b)
    bits = rng.integers(0, 2, size=n)
    return StochasticGame(LowerBoundGame(bits, ell))


class TinyTensorGame(TensorGame):
    """Random explicit tensor squeezed into a width-gamma band around 1/2."""

    def __init__(self, raw: np.ndarray, gamma: float):
        self.raw = _readonly(raw)
        self.gamma_band = float(gamma)
        n = raw.shape[0]
        tensor = 0.5 - gamma / 2.0 + gamma * raw
        super().__init__(tensor, c=gamma * n)


def gen_tiny_tensor(n: int, k: int, gamma: float, seed: int) -> TinyTensorGame:
    """Uniform random tensor rescaled so largeness holds by construction."""
    if k ** n > 4096:
        raise ValueError("tiny tensor games require k^n <= 4096")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    raw = rng.random((n,) + (k,) * n)
    return TinyTensorGame(raw, gamma)


# ---------------------------------------------------------------------------
# descriptors

FAMILIES = ("linear-influence", "lower-bound", "tiny-tensor")


def make_game(family: str, params: dict, seed: int) -> Game:
    if family == "linear-influence":
        return gen_linear_influence(int(params["n"]), int(params.get("k", 2)),
                                    float(params.get("c", 1.0)), seed)
    if family == "lower-bound":
        return gen_lower_bound(int(params["n"]), float(params.get("ell", 4.0)), seed)
    if family == "tiny-tensor":
        n = int(params["n"])
        k = int(params.get("k", 2))
        if "gamma" in params:
            gamma = float(params["gamma"])
        else:
            gamma = float(params.get("c", 1.0)) / n
        return gen_tiny_tensor(n, k, gamma, seed)
    raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")


def descriptor(family: str, params: dict, seed: int) -> dict:
    return {"family": family, "params": dict(params), "seed": int(seed)}


def descriptor_to_json(desc: dict) -> str:
    return json.dumps(desc, sort_keys=True)


def game_from_descriptor(desc: dict) -> Game:
    return make_game(desc["family"], desc["params"], desc["seed"])


def game_from_json(text: str) -> Game:
    obj = json.loads(text)
    if "payoffs" in obj:  # explicit tiny tensor
        return TensorGame.from_json(text)
    return game_from_descriptor(obj)
