#!/usr/bin/env python3
"""Theoretical bound comparison (curve dynamics vs block update) next to
measured regrets on seeded games at each influence budget."""

import argparse

import largegames as lg


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--c", default="0.5,1,2,4")
    parser.add_argument("--n", type=int, default=50)
    parser.add_argument("--seeds", type=int, default=5)
    parser.add_argument("--blocks", type=int, default=100)
    parser.add_argument("--alpha", type=float, default=0.05)
    args = parser.parse_args()
    cs = [float(x) for x in args.c.split(",")]

    print("c,curve_bound,block_bound,curve_measured,block_measured")
    for c in cs:
        curve_bound = lg.curve_regret_bound(c)
        block_bound = lg.block_update_bound(c, 2, None)
        curve_worst = block_worst = 0.0
        for seed in range(args.seeds):
            game = lg.gen_linear_influence(args.n, 2, c, seed=seed)
            _, rep = lg.curve_dynamics(lg.OracleSession(game, seed=seed),
                                       lg.DynamicsParams(alpha=args.alpha))
            curve_worst = max(curve_worst, rep.max_regret)
            _, rep, _ = lg.block_update(lg.OracleSession(game, seed=seed), args.blocks)
            block_worst = max(block_worst, rep.max_regret)
        print(f"{c},{curve_bound},{block_bound},{curve_worst},{block_worst}")


if __name__ == "__main__":
    main()
