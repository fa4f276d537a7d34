"""Run records shared by all algorithms."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .games import CapabilityError, Game, MixedProfile, regret_report


def profile_digest(profile: MixedProfile) -> str:
    return hashlib.sha256(np.ascontiguousarray(profile.probs).tobytes()).hexdigest()[:16]


def array_digest(arr: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(arr).tobytes()).hexdigest()[:16]


@dataclass
class RunReport:
    """One algorithm run: parameters, query spend and exact regret summary."""

    algorithm: str
    params: dict
    seed: int
    n: int
    c: float
    rounds: int
    pure_queries: int
    qm_calls: int
    max_regret: float | None
    regret_summary: dict
    profile_digest: str
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "algorithm": self.algorithm,
            "params": self.params,
            "seed": self.seed,
            "n": self.n,
            "c": self.c,
            "rounds": self.rounds,
            "pure_queries": self.pure_queries,
            "qm_calls": self.qm_calls,
            "max_regret": self.max_regret,
            "per_player_regret_summary": self.regret_summary,
            "final_profile_digest": self.profile_digest,
        }
        out.update(self.extra)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def summarize_regrets(regrets: np.ndarray) -> dict:
    return {
        "min": float(regrets.min()),
        "mean": float(regrets.mean()),
        "median": float(np.median(regrets)),
        "max": float(regrets.max()),
    }


def build_report(algorithm: str, params: dict, session, profile: MixedProfile,
                 rounds: int, extra: dict | None = None) -> RunReport:
    """Assemble a report, grading the final profile exactly when the game allows."""
    game: Game = session.game
    try:
        rep = regret_report(game, profile)
        max_regret = rep.max_regret
        summary = summarize_regrets(rep.regrets)
    except CapabilityError:
        max_regret = None
        summary = {}
    return RunReport(
        algorithm=algorithm,
        params=dict(params),
        seed=session.seed,
        n=game.n,
        c=game.c,
        rounds=rounds,
        pure_queries=session.pure_queries,
        qm_calls=session.qm_calls,
        max_regret=max_regret,
        regret_summary=summary,
        profile_digest=profile_digest(profile),
        extra=dict(extra or {}),
    )
