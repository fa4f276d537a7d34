"""Experiment orchestration: configs, algorithm dispatch, declared
bounds, and deterministic parallel execution over seeds."""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import binary, blocks, continuous, families
from .games import MixedProfile
from .oracles import OracleSession
from .reports import RunReport, build_report

ALGORITHMS = ("uniform", "one-step", "two-step", "plane", "plane-comm",
              "curve", "block-update", "plane-flow", "curve-flow")

BINARY_ALGOS = {"uniform", "one-step", "two-step", "plane", "plane-comm",
                "curve", "plane-flow", "curve-flow"}


@dataclass
class ExperimentConfig:
    """One batch: a game family, an algorithm, an oracle mode and seeds."""

    family: dict                      # {"family": name, "params": {...}}
    algo: str
    algo_params: dict = field(default_factory=dict)
    oracle: str = "exact"             # "exact" | "sampling"
    beta: float | None = None
    delta: float | None = None
    seeds: list[int] = field(default_factory=list)
    out: str | None = None
    trace: str | None = None

    def __post_init__(self):
        if self.algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algo!r}")
        if self.family.get("family") not in families.FAMILIES:
            raise ValueError(f"unknown family {self.family.get('family')!r}")
        if self.oracle not in ("exact", "sampling"):
            raise ValueError("oracle must be 'exact' or 'sampling'")
        if self.algo.endswith("-flow") and self.oracle != "exact":
            raise ValueError("continuous flows integrate exact expectations only")
        if self.trace and len(self.seeds) > 1 and "{seed}" not in self.trace:
            raise ValueError("trace path needs a {seed} placeholder with multiple seeds")

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        return cls(
            family=obj["family"],
            algo=obj["algo"],
            algo_params=dict(obj.get("algo_params", {})),
            oracle=obj.get("oracle", "exact"),
            beta=obj.get("beta"),
            delta=obj.get("delta"),
            seeds=[int(s) for s in obj.get("seeds", [])],
            out=obj.get("out"),
            trace=obj.get("trace"),
        )


def max_workers() -> int:
    cap = os.environ.get("LGL_THREADS")
    workers = os.cpu_count() or 1
    if cap:
        workers = min(workers, max(1, int(cap)))
    return workers


def theoretical_bound(algo: str, params: dict, game) -> float | None:
    """The worst-case regret the exact-oracle run promises to respect."""
    if algo == "uniform":
        return 0.5
    if algo == "one-step":
        return 0.272
    if algo == "two-step":
        return 0.25
    if algo == "plane":
        return 1.0 / 8.0 + params["alpha"]
    if algo == "plane-comm":
        return 137.0 / 1100.0 + params["alpha"]
    if algo == "curve":
        return binary.curve_regret_bound(params.get("c") or game.c, params["alpha"])
    if algo == "block-update":
        return blocks.block_update_bound(game.c, game.k, params["blocks"])
    return None


def run_one(config: ExperimentConfig, seed: int):
    """Build the seeded game and session, run the algorithm, grade it.

    Returns (report, profile, trajectory-or-None).
    """
    game = families.make_game(config.family["family"],
                              config.family.get("params", {}), seed)
    trace = None
    if config.trace:
        trace = config.trace.replace("{seed}", str(seed))
    session = OracleSession(game, seed=seed, trace_path=trace)
    params = dict(config.algo_params)
    mode = config.oracle
    trajectory = None
    try:
        if config.algo == "uniform":
            profile = MixedProfile.uniform(game.n, game.k)
            report = build_report("uniform", {}, session, profile, rounds=0)
        elif config.algo == "one-step":
            kwargs = {"mode": mode}
            if config.beta is not None:
                kwargs |= {"beta": config.beta}
            if config.delta is not None:
                kwargs |= {"delta": config.delta}
            profile, report = binary.one_step(session, **kwargs)
        elif config.algo == "two-step":
            kwargs = {"mode": mode}
            if config.beta is not None:
                kwargs |= {"beta": config.beta}
            if config.delta is not None:
                kwargs |= {"delta": config.delta}
            profile, report = binary.two_step(session, **kwargs)
        elif config.algo in ("plane", "plane-comm"):
            dparams = binary.DynamicsParams(alpha=float(params.get("alpha", 0.05)),
                                            eta=float(params.get("eta", 0.1)))
            fn = binary.plane_dynamics if config.algo == "plane" else binary.communication_dynamics
            profile, report = fn(session, dparams, mode=mode, sample_beta=config.beta)
        elif config.algo == "curve":
            dparams = binary.DynamicsParams(alpha=float(params.get("alpha", 0.05)),
                                            eta=float(params.get("eta", 0.1)))
            c = params.get("c")
            profile, report = binary.curve_dynamics(session, dparams,
                                                    c=None if c is None else float(c),
                                                    mode=mode, sample_beta=config.beta)
        elif config.algo == "block-update":
            profile, report, _ = blocks.block_update(
                session, int(params.get("blocks", 100)), mode=mode,
                beta=config.beta if config.beta is not None else 0.1,
                delta=config.delta if config.delta is not None else 0.05)
        elif config.algo in ("plane-flow", "curve-flow"):
            step_h = float(params.get("step_h", 1e-3))
            horizon = float(params.get("horizon", 1.0))
            if config.algo == "plane-flow":
                trajectory = continuous.simulate_plane_flow(game, step_h, horizon)
            else:
                trajectory = continuous.simulate_curve_flow(
                    game, float(params.get("c", game.c)), step_h, horizon)
            profile = MixedProfile.from_binary(trajectory.p[-1])
            report = build_report(config.algo,
                                  {"step_h": step_h, "horizon": horizon},
                                  session, profile, rounds=trajectory.times.shape[0] - 1)
        else:  # pragma: no cover
            raise ValueError(config.algo)
    finally:
        session.close()

    bound = None
    if config.oracle == "exact" and config.algo in (
            "uniform", "one-step", "two-step", "plane", "plane-comm", "curve",
            "block-update"):
        merged = {"alpha": float(params.get("alpha", 0.05)),
                  "c": params.get("c"), "blocks": int(params.get("blocks", 100))}
        bound = theoretical_bound(config.algo, merged, game)
    if bound is not None:
        report.extra["declared_bound"] = bound
        report.extra["bound_ok"] = bool(report.max_regret is not None
                                        and report.max_regret <= bound + 1e-9)
    return report, profile, trajectory


def parallel_over_seeds(fn, seeds):
    """Map fn over seeds with LGL_THREADS-capped workers; order preserved."""
    seeds = list(seeds)
    if not seeds:
        return []
    workers = min(max_workers(), len(seeds))
    if workers <= 1:
        return [fn(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seeds))


def run_many(config: ExperimentConfig) -> list[RunReport]:
    """One report per seed, executed in parallel sessions, ordered by seed."""
    results = parallel_over_seeds(lambda s: run_one(config, s)[0], config.seeds)
    return sorted(results, key=lambda r: r.seed)


SWEEP_COLUMNS = ["algorithm", "family", "n", "c", "k", "alpha", "eta", "beta",
                 "delta", "blocks", "seed", "max_regret", "pure_queries", "qm_calls"]


def sweep_rows(algos, family: str, ns, cs, ks, alphas, blocks_grid, seeds,
               oracle: str = "exact", eta: float = 0.1,
               beta: float | None = None, delta: float | None = None,
               timing: bool = False) -> list[dict]:
    """Cross product of the parameter grids, one row per run.

    The alpha grid only multiplies runs of the banded dynamics and the
    blocks grid only multiplies block-update runs; other algorithms run
    once per (n, c, k, seed) cell.
    """
    alphas = list(alphas) or [0.05]
    blocks_grid = list(blocks_grid) or [100]
    banded = ("plane", "plane-comm", "curve")
    rows = []
    for algo in algos:
        alpha_grid = alphas if algo in banded else alphas[:1]
        block_grid = blocks_grid if algo == "block-update" else blocks_grid[:1]
        for n in ns:
            for c in cs:
                for k in ks:
                    if algo in BINARY_ALGOS and k != 2:
                        continue
                    for alpha in alpha_grid:
                        for blocks_n in block_grid:
                            config = ExperimentConfig(
                                family={"family": family,
                                        "params": {"n": n, "k": k, "c": c}},
                                algo=algo,
                                algo_params={"alpha": alpha, "eta": eta,
                                             "blocks": blocks_n},
                                oracle=oracle, beta=beta, delta=delta,
                                seeds=list(seeds))

                            def timed(seed, config=config):
                                start = time.perf_counter()
                                report, _, _ = run_one(config, seed)
                                return report, (time.perf_counter() - start) * 1e3

                            for seed, (report, wall_ms) in zip(
                                    config.seeds,
                                    parallel_over_seeds(timed, config.seeds)):
                                row = {
                                    "algorithm": algo, "family": family, "n": n,
                                    "c": c, "k": k,
                                    "alpha": alpha if algo in banded else "",
                                    "eta": eta if algo in banded else "",
                                    "beta": "" if beta is None else beta,
                                    "delta": "" if delta is None else delta,
                                    "blocks": blocks_n if algo == "block-update" else "",
                                    "seed": seed,
                                    "max_regret": report.max_regret,
                                    "pure_queries": report.pure_queries,
                                    "qm_calls": report.qm_calls,
                                }
                                if timing:
                                    row["wall_ms"] = round(wall_ms, 3)
                                rows.append(row)
    def key(r):
        return (r["algorithm"], r["n"], r["c"], r["k"],
                str(r["alpha"]), str(r["blocks"]), r["seed"])
    return sorted(rows, key=key)


def _cell(value) -> str:
    if value == "" or value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_cell(row.get(col, "")) for col in columns))
    return "\n".join(lines) + "\n"
