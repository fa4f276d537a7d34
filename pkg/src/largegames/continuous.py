"""Fixed-step integration of the continuous best-response-band dynamics.

The flows move each player's probability at unit speed toward the plane
(or its general-influence curve) and then track payoff derivatives to
stay on it.  Derivatives are backward difference quotients because only
payoff values are observable; the membership tolerance scales with the
step size to absorb the first-order integration drift.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .games import Game, MixedProfile, mixed_payoff_table
from .binary import plane_residual


@dataclass(frozen=True)
class Trajectory:
    """Per-step record of every player's state and target residual."""

    times: np.ndarray      # (steps + 1,)
    v: np.ndarray          # (steps + 1, n, 2) exact payoffs, column j = action j
    p: np.ndarray          # (steps + 1, n) probability of action 1
    residual: np.ndarray   # (steps + 1, n) signed distance to the target set
    band: float            # membership tolerance used by the flow

    @property
    def n(self) -> int:
        return self.p.shape[1]

    def first_inside(self, tol: float | None = None) -> np.ndarray:
        """Per player, the first time the residual enters the tolerance band."""
        tol = self.band if tol is None else tol
        inside = np.abs(self.residual) <= tol + 1e-12
        first = np.full(self.n, np.inf)
        for i in range(self.n):
            hits = np.nonzero(inside[:, i])[0]
            if hits.size:
                first[i] = self.times[hits[0]]
        return first

    def stays_inside(self, t_from: float, tol: float | None = None) -> bool:
        tol = self.band if tol is None else tol
        mask = self.times >= t_from - 1e-12
        return bool(np.all(np.abs(self.residual[mask]) <= tol + 1e-12))

    def write_csv(self, path, downsample: int = 1):
        if downsample < 1:
            raise ValueError("downsample factor must be >= 1")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "player", "v1", "v0", "p", "d"])
            for m in range(0, self.times.shape[0], downsample):
                for i in range(self.n):
                    writer.writerow([repr(float(self.times[m])), i,
                                     repr(float(self.v[m, i, 1])),
                                     repr(float(self.v[m, i, 0])),
                                     repr(float(self.p[m, i])),
                                     repr(float(self.residual[m, i]))])


def _exact_table(game: Game, p_one: np.ndarray) -> np.ndarray:
    return mixed_payoff_table(game, MixedProfile.from_binary(p_one))


def simulate_plane_flow(game: Game, step_h: float = 1e-3, horizon: float = 1.0) -> Trajectory:
    """Integrate the plane-reaching flow from the uniform start.

    Off the plane (residual beyond 2h) players move at unit speed toward
    their current best response; on it they match half the difference of
    payoff derivatives, which freezes the residual.
    """
    if game.k != 2:
        raise ValueError("the flow is defined for binary games")
    steps = int(round(horizon / step_h))
    tol = 2.0 * step_h
    n = game.n
    p = np.full(n, 0.5)
    v_prev = _exact_table(game, p)

    times = np.empty(steps + 1)
    vs = np.empty((steps + 1, n, 2))
    ps = np.empty((steps + 1, n))
    res = np.empty((steps + 1, n))

    v = v_prev
    for m in range(steps + 1):
        d = plane_residual(v[:, 1], v[:, 0], p)
        times[m], vs[m], ps[m], res[m] = m * step_h, v, p, d
        if m == steps:
            break
        vdot = (v - v_prev) / step_h if m > 0 else np.zeros_like(v)
        toward = np.where(v[:, 1] >= v[:, 0], 1.0, -1.0)
        tracking = np.clip((vdot[:, 1] - vdot[:, 0]) / 2.0, -1.0, 1.0)
        pdot = np.where(np.abs(d) > tol, toward, tracking)
        p = np.clip(p + step_h * pdot, 0.0, 1.0)
        v_prev = v
        v = _exact_table(game, p)
    return Trajectory(times=times, v=vs, p=ps, residual=res, band=tol)


def simulate_curve_flow(game: Game, c: float, step_h: float = 1e-3,
                        horizon: float = 1.0) -> Trajectory:
    """Integrate the capped-curve flow p* -> min(1/2 + D/(2c), 1).

    Below the curve the best-response mass climbs at unit speed; above
    the uncapped line it holds still; otherwise it tracks the
    discrepancy derivative scaled by 1/(2c).
    """
    if game.k != 2:
        raise ValueError("the flow is defined for binary games")
    if c <= 0:
        raise ValueError("c must be positive")
    steps = int(round(horizon / step_h))
    tol = 2.0 * step_h * max(1.0, 1.0 / (2.0 * c))
    n = game.n
    p = np.full(n, 0.5)
    v = _exact_table(game, p)
    disc_prev = np.abs(v[:, 1] - v[:, 0])

    times = np.empty(steps + 1)
    vs = np.empty((steps + 1, n, 2))
    ps = np.empty((steps + 1, n))
    res = np.empty((steps + 1, n))

    for m in range(steps + 1):
        disc = np.abs(v[:, 1] - v[:, 0])
        toward_one = v[:, 1] >= v[:, 0]
        pstar = np.where(toward_one, p, 1.0 - p)
        line = 0.5 + disc / (2.0 * c)
        rho = pstar - np.minimum(line, 1.0)
        times[m], vs[m], ps[m], res[m] = m * step_h, v, p, rho
        if m == steps:
            break
        ddot = (disc - disc_prev) / step_h if m > 0 else np.zeros_like(disc)
        tracking = np.clip(ddot / (2.0 * c), -1.0, 1.0)
        pstar_dot = np.where(rho < -tol, 1.0,
                             np.where((rho > tol) & (pstar > line), 0.0, tracking))
        pdot = np.where(toward_one, pstar_dot, -pstar_dot)
        p = np.clip(p + step_h * pdot, 0.0, 1.0)
        disc_prev = disc
        v = _exact_table(game, p)
    return Trajectory(times=times, v=vs, p=ps, residual=res, band=tol)
