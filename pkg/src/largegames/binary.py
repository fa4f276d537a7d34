"""Equilibrium procedures for binary-action small-influence games.

All procedures drive the per-player probability of action 1 and reason
about strategy/payoff states s = (v1, v0, p).  The central geometric
object is the plane where the best-response mass equals (1 + D) / 2;
states on it have regret at most 1/8, and states within a band of
half-width lambda have regret at most (1/8)(1 + 2 lambda)^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .games import MixedProfile
from .oracles import OracleSession
from .reports import build_report

PLANE_NORMAL = np.array([-0.5, 0.5, 1.0])
PLANE_OFFSET = 0.5

# single-adjustment constants: argmin of max(a/2 + d, 1/2 - d, (1/2)(1+2d)(2d-a))
ONE_STEP_ALPHA = 2.0 - math.sqrt(11.0 / 3.0)
ONE_STEP_SHIFT = math.sqrt(11.0 / 48.0) - 0.25

BAD_REGRET = 0.12  # plane states with best-response mass in [0.7, 0.8]


def plane_product(state) -> float:
    """Inner product of a strategy/payoff state (v1, v0, p) with the plane normal."""
    return float(np.dot(np.asarray(state, dtype=float), PLANE_NORMAL))


def plane_residual(v1, v0, p):
    """Signed distance-like residual; zero exactly on the plane."""
    return p - PLANE_OFFSET - (np.asarray(v1) - np.asarray(v0)) / 2.0


@dataclass(frozen=True)
class PlaneBand:
    """The band of states whose plane product is within half_width of 1/2."""

    half_width: float

    normal = PLANE_NORMAL
    offset = PLANE_OFFSET

    def residual(self, state) -> float:
        return plane_product(state) - self.offset

    def contains(self, state, tol: float = 1e-12) -> bool:
        return abs(self.residual(state)) <= self.half_width + tol


@dataclass(frozen=True)
class DynamicsParams:
    """Accuracy/confidence pair with the derived band, step and horizon.

    band = (sqrt(1 + 8 alpha) - 1) / 2 makes the band's worst-case regret
    exactly 1/8 + alpha; the step is a quarter band and the horizon is
    the number of steps needed to sweep the whole probability range.
    """

    alpha: float
    eta: float = 0.1

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if not 0 < self.eta <= 1:
            raise ValueError("eta must lie in (0, 1]")

    @cached_property
    def band(self) -> float:
        return (math.sqrt(1.0 + 8.0 * self.alpha) - 1.0) / 2.0

    @cached_property
    def step(self) -> float:
        return self.band / 4.0

    @cached_property
    def rounds(self) -> int:
        return math.ceil(2.0 / self.step)

    def as_dict(self) -> dict:
        return {"alpha": self.alpha, "eta": self.eta, "band": self.band,
                "step": self.step, "rounds": self.rounds}


@dataclass(frozen=True)
class BadGoodLabels:
    """Players flagged by estimated regret at least 0.12, plus their fraction."""

    bad: np.ndarray
    theta: float


def label_bad_players(vhat: np.ndarray, p_one: np.ndarray) -> BadGoodLabels:
    disc = np.abs(vhat[:, 1] - vhat[:, 0])
    pstar = np.where(vhat[:, 1] >= vhat[:, 0], p_one, 1.0 - p_one)
    est_regret = disc * (1.0 - pstar)
    bad = est_regret >= BAD_REGRET
    return BadGoodLabels(bad=bad, theta=float(bad.mean()))


class DynamicsRecorder:
    """Optional per-round capture of probabilities, residuals and signs."""

    def __init__(self):
        self._probs = []
        self._residuals = []
        self._signs = []

    def start(self, p_one):
        self._probs.append(np.array(p_one))

    def step(self, p_one, residual, signs=None):
        self._probs.append(np.array(p_one))
        self._residuals.append(np.array(residual))
        if signs is not None:
            self._signs.append(np.array(signs))

    @property
    def probs(self) -> np.ndarray:
        return np.array(self._probs)

    @property
    def residuals(self) -> np.ndarray:
        return np.array(self._residuals)

    @property
    def signs(self) -> np.ndarray:
        return np.array(self._signs)


class _MixedEstimator:
    """Uniform access to mixed payoff tables, exact or sampled."""

    def __init__(self, session: OracleSession, mode: str, beta: float, delta: float):
        if mode not in ("exact", "sampling"):
            raise ValueError("oracle mode must be 'exact' or 'sampling'")
        if session.game.k != 2:
            raise ValueError("binary dynamics require k = 2")
        self.session = session
        self.mode = mode
        self.beta = beta
        self.delta = delta

    def __call__(self, p_one: np.ndarray) -> np.ndarray:
        profile = MixedProfile.from_binary(p_one)
        if self.mode == "exact":
            return self.session.exact_mixed(profile)
        return self.session.sample_mixed_binary(profile, self.beta, self.delta).values


def uniform_profile(n: int, k: int = 2) -> MixedProfile:
    """The queryless baseline: every player mixes uniformly."""
    return MixedProfile.uniform(n, k)


def one_step(session: OracleSession, alpha: float = ONE_STEP_ALPHA,
             shift: float = ONE_STEP_SHIFT, mode: str = "exact",
             beta: float = 0.1, delta: float = 0.05):
    """Single adjustment from uniform: players whose payoff gap exceeds
    ``alpha`` move ``shift`` probability toward their best response."""
    est = _MixedEstimator(session, mode, beta, delta)
    n = session.game.n
    v = est(np.full(n, 0.5))
    gap = v[:, 1] - v[:, 0]
    p = np.where(gap > alpha, 0.5 + shift,
                 np.where(-gap > alpha, 0.5 - shift, 0.5))
    profile = MixedProfile.from_binary(p)
    report = build_report("one-step", {"alpha": alpha, "shift": shift, "mode": mode},
                          session, profile, rounds=1)
    return profile, report


def two_step(session: OracleSession, mode: str = "exact",
             beta: float = 0.1, delta: float = 0.05):
    """Shift best responses to mass 3/4, then send players whose best
    response flipped back to uniform."""
    est = _MixedEstimator(session, mode, beta, delta)
    n = session.game.n
    v = est(np.full(n, 0.5))
    first = (v[:, 1] > v[:, 0]).astype(int)  # ties break to action 0
    p_shift = np.where(first == 1, 0.75, 0.25)
    v2 = est(p_shift)
    second = (v2[:, 1] > v2[:, 0]).astype(int)
    p_final = np.where(first != second, 0.5, p_shift)
    profile = MixedProfile.from_binary(p_final)
    report = build_report("two-step", {"mode": mode}, session, profile, rounds=2)
    return profile, report


def _plane_rounds(est: _MixedEstimator, p: np.ndarray, band: float, step: float,
                  rounds: int, recorder: DynamicsRecorder | None):
    """Banded plane pursuit: off-band states step toward the band, in-band
    states track payoff changes to stay put.  Returns (p, last estimate)."""
    vhat_prev = est(p)
    if recorder is not None:
        recorder.start(p)
    for _ in range(rounds):
        vhat = est(p)
        dv = vhat - vhat_prev
        resid = plane_residual(vhat[:, 1], vhat[:, 0], p)
        off = np.abs(resid) > band / 4.0
        tracking = (dv[:, 1] - dv[:, 0]) / 2.0
        move = np.where(off, -np.sign(resid) * step, tracking)
        p = np.clip(p + move, 0.0, 1.0)
        vhat_prev = vhat
        if recorder is not None:
            recorder.step(p, resid, np.where(vhat[:, 1] >= vhat[:, 0], 1, -1))
    return p, vhat_prev


def plane_dynamics(session: OracleSession, params: DynamicsParams, mode: str = "exact",
                   sample_beta: float | None = None,
                   recorder: DynamicsRecorder | None = None):
    """Completely uncoupled rounds steering every state into the plane band.

    Sampling mode estimates payoffs with accuracy beta = step (or the
    relaxed override) and per-round confidence eta / rounds; exact mode
    substitutes exact mixed queries.
    """
    beta = sample_beta if sample_beta is not None else params.step
    delta = params.eta / params.rounds
    est = _MixedEstimator(session, mode, beta, delta)
    p, _ = _plane_rounds(est, np.full(session.game.n, 0.5), params.band,
                         params.step, params.rounds, recorder)
    profile = MixedProfile.from_binary(p)
    run_params = params.as_dict() | {"mode": mode}
    if mode == "sampling":
        run_params |= {"sample_beta": beta, "sample_delta": delta}
    report = build_report("plane", run_params, session, profile, rounds=params.rounds)
    return profile, report


def communication_dynamics(session: OracleSession, params: DynamicsParams,
                           mode: str = "exact", sample_beta: float | None = None,
                           recorder: DynamicsRecorder | None = None):
    """Plane pursuit plus one broadcast bit that lets high-regret players
    shed regret below the 1/8 plane bound.

    After the banded rounds, players with estimated regret >= 0.12 are
    flagged.  If they are the majority (the broadcast bit), they march
    toward their best responses for 0.15 probability mass while the rest
    track; then the (re-labelled) flagged players march a further 1/220.
    """
    beta = sample_beta if sample_beta is not None else params.step
    delta = params.eta / params.rounds
    est = _MixedEstimator(session, mode, beta, delta)
    p, _ = _plane_rounds(est, np.full(session.game.n, 0.5), params.band,
                         params.step, params.rounds, recorder)

    vhat = est(p)  # fresh estimate at the settled profile for labelling
    labels = label_bad_players(vhat, p)
    theta_measured = labels.theta
    rounds = params.rounds + 1

    def march(p, vhat_prev, bad, n_rounds):
        for _ in range(n_rounds):
            vhat = est(p)
            dv = vhat - vhat_prev
            sign = np.where(vhat[:, 1] >= vhat[:, 0], 1.0, -1.0)
            tracking = (dv[:, 1] - dv[:, 0]) / 2.0
            move = np.where(bad, sign * params.step, tracking)
            p = np.clip(p + move, 0.0, 1.0)
            vhat_prev = vhat
        return p, vhat_prev

    theta_bit = labels.theta > 0.5
    if theta_bit:
        balance_rounds = math.ceil(0.15 / params.step)
        p, vhat = march(p, vhat, labels.bad, balance_rounds)
        rounds += balance_rounds
        labels = label_bad_players(vhat, p)

    if labels.bad.any():
        final_rounds = math.ceil((1.0 / 220.0) / params.step)
        p, vhat = march(p, vhat, labels.bad, final_rounds)
        rounds += final_rounds

    profile = MixedProfile.from_binary(p)
    run_params = params.as_dict() | {"mode": mode, "theta": theta_measured,
                                     "theta_bit": bool(theta_bit),
                                     "theta_final": labels.theta}
    report = build_report("plane-comm", run_params, session, profile, rounds=rounds)
    return profile, report


# ---------------------------------------------------------------------------
# general influence budget: the plane generalizes to a capped curve

def curve_target(disc, c: float):
    """Best-response mass the dynamics aim for: min(1/2 + D / (2c), 1)."""
    return np.minimum(0.5 + np.asarray(disc, dtype=float) / (2.0 * c), 1.0)


def curve_band(alpha: float, c: float) -> float:
    """Band half-width whose worst-case regret meets the curve bound + alpha."""
    if c <= 0:
        raise ValueError("c must be positive")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if c <= 2:
        return (math.sqrt(1.0 + 8.0 * alpha / c) - 1.0) / 2.0
    return alpha


def curve_regret_bound(c: float, alpha: float = 0.0) -> float:
    """Worst-case regret on the curve: c/8 for c <= 2, else 1/2 - 1/(2c)."""
    if c <= 0:
        raise ValueError("c must be positive")
    value = c / 8.0 if c <= 2 else 0.5 - 1.0 / (2.0 * c)
    return value + alpha


def curve_dynamics(session: OracleSession, params: DynamicsParams, c: float | None = None,
                   mode: str = "exact", sample_beta: float | None = None,
                   recorder: DynamicsRecorder | None = None):
    """Banded pursuit of the capped curve p* = min(1/2 + D/(2c), 1).

    Three cases per round: climb toward the curve from below (snapping on
    arrival, which pins saturated players at a pure best response), hold
    when strictly above the uncapped line (such states already beat the
    curve's regret), and otherwise track discrepancy changes along the
    sloped section.
    """
    if c is None:
        c = session.game.c
    if c <= 0:
        raise ValueError("c must be positive")
    band = curve_band(params.alpha, c)
    step = band / 4.0
    rounds = math.ceil(2.0 / step)
    beta = sample_beta if sample_beta is not None else step
    delta = params.eta / rounds
    est = _MixedEstimator(session, mode, beta, delta)

    p = np.full(session.game.n, 0.5)
    vhat_prev = est(p)
    disc_prev = np.abs(vhat_prev[:, 1] - vhat_prev[:, 0])
    if recorder is not None:
        recorder.start(p)
    for _ in range(rounds):
        vhat = est(p)
        disc = np.abs(vhat[:, 1] - vhat[:, 0])
        d_disc = disc - disc_prev
        toward_one = vhat[:, 1] >= vhat[:, 0]
        pstar = np.where(toward_one, p, 1.0 - p)
        line = 0.5 + disc / (2.0 * c)
        target = np.minimum(line, 1.0)
        rho = pstar - target

        climb = np.minimum(pstar + step, target)
        track = np.clip(pstar + d_disc / (2.0 * c), 0.0, 1.0)
        new_pstar = np.where((line >= 1.0) | (rho < -band / 4.0), climb,
                             np.where(pstar > line + band / 4.0, pstar, track))
        p = np.where(toward_one, new_pstar, 1.0 - new_pstar)
        vhat_prev, disc_prev = vhat, disc
        if recorder is not None:
            recorder.step(p, rho, np.where(toward_one, 1, -1))

    profile = MixedProfile.from_binary(p)
    run_params = {"alpha": params.alpha, "eta": params.eta, "c": c, "band": band,
                  "step": step, "rounds": rounds, "mode": mode}
    report = build_report("curve", run_params, session, profile, rounds=rounds)
    return profile, report
