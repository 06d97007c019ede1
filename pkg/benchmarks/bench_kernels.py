"""Compare the compiled and pure-Python kernel backends.

Run with ``python3 benchmarks/bench_kernels.py``. For each kernel and size
it reports the median wall time per call for every available backend, the
speed-up of the compiled one, and the max-abs disagreement between the two.
"""
from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from ruzsa import kernels


def _time(fn, repeat: int) -> float:
    fn()  # warm-up
    ts = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t0)
    return statistics.median(ts)


def cases(rng):
    for m in (8, 32, 64):
        p, q = rng.dirichlet(np.ones(m)), rng.dirichlet(np.ones(m))
        yield f"cyclic_convolve_naive Z_{m}", lambda p=p, q=q, m=m: kernels.cyclic_convolve_naive(p, q, (m,))
    p, q = rng.dirichlet(np.ones(64)), rng.dirichlet(np.ones(64))
    yield "cyclic_convolve_naive Z_8^2", lambda: kernels.cyclic_convolve_naive(p, q, (8, 8))
    for n in (1_000, 100_000):
        x = rng.dirichlet(np.ones(n))
        yield f"entropy_nats n={n}", lambda x=x: kernels.entropy_nats(x)
    for n in (1_000, 100_000):
        y = np.cumsum(rng.normal(size=n))  # many violators
        yield f"pav_decreasing n={n}", lambda y=y: kernels.pav_decreasing(y)


def run(repeat: int = 20, seed: int = 0) -> list[dict]:
    rng = np.random.default_rng(seed)
    backends = kernels.available_backends()
    previous = kernels.backend()
    rows = []
    try:
        for label, fn in cases(rng):
            row = {"kernel": label}
            outs = {}
            for b in backends:
                kernels.use_backend(b)
                row[b] = _time(fn, repeat)
                outs[b] = np.asarray(fn(), dtype=float)
            if len(outs) == 2:
                row["speedup"] = row["python"] / row["compiled"]
                row["max_abs_diff"] = float(np.max(np.abs(outs["python"] - outs["compiled"])))
            rows.append(row)
    finally:
        kernels.use_backend(previous)
    return rows


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rows = run(args.repeat, args.seed)
    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}")
    head = f"{'kernel':32s}" + "".join(f"{b + ' [us]':>16s}" for b in backends)
    if len(backends) == 2:
        head += f"{'speedup':>10s}{'max |diff|':>12s}"
    print(head)
    for r in rows:
        line = f"{r['kernel']:32s}" + "".join(f"{1e6 * r[b]:16.1f}" for b in backends)
        if "speedup" in r:
            line += f"{r['speedup']:10.1f}{r['max_abs_diff']:12.1e}"
        print(line)


if __name__ == "__main__":
    main()
