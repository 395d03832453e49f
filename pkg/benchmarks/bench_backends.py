"""Timing comparison of the numba and numpy kernel builds.

Runs each registered kernel's representative workload under both backends
and prints a table with the speedup.  Numba's first call compiles (or loads
the on-disk cache), so every workload gets one untimed warmup call.

    python3 benchmarks/bench_backends.py [--repeats N] [--quick]
"""
import argparse
import statistics
import time

import numpy as np

from gridgame import backend, gamesolve, marl
from gridgame.netmodel import load_ieee33, power_flow


def workloads(quick: bool):
    scale = 10 if quick else 1
    m10 = np.random.default_rng(0).random((10, 10))
    net = load_ieee33()
    opp = gamesolve.MixedStrategy(np.full(10, 0.1))
    episodes = 200_000 // scale
    mdp = marl.stage_mdp_default(m10)

    def flow():
        for _ in range(200 // scale):
            power_flow(net)

    return [
        ("power_flow x%d" % (200 // scale), flow),
        ("fictitious_play 1e%d" % (6 - (scale > 1)),
         lambda: gamesolve.nash_fictitious_play(m10, max_iters=1_000_000 // scale,
                                                tol=0.0)),
        ("regret_matching %d" % (500_000 // scale),
         lambda: gamesolve.regret_matching(m10, T=500_000 // scale, seed=1)),
        ("single_agent %dk" % (episodes // 1000),
         lambda: marl.train_single_agent(
             m10, opp, marl.LearningConfig(episodes=episodes, seed=2))),
        ("mdp_train %dk" % (episodes // 1000),
         lambda: marl.mdp_train(
             mdp, marl.LearningConfig(episodes=episodes, seed=3, gamma=0.8))),
    ]


def best_of(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--quick", action="store_true",
                    help="10x smaller workloads")
    args = ap.parse_args()

    rows = []
    for label, fn in workloads(args.quick):
        timings = {}
        for name in ("numba", "numpy"):
            backend.set_backend(name)
            fn()  # warmup: jit compile / cache load
            timings[name] = best_of(fn, args.repeats)
        rows.append((label, timings["numpy"], timings["numba"],
                     timings["numpy"] / timings["numba"]))

    width = max(len(r[0]) for r in rows)
    print(f"{'workload':<{width}}  {'numpy [s]':>10}  {'numba [s]':>10}  {'speedup':>8}")
    for label, t_np, t_nb, speed in rows:
        print(f"{label:<{width}}  {t_np:>10.4f}  {t_nb:>10.4f}  {speed:>7.1f}x")


if __name__ == "__main__":
    main()
