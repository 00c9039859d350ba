"""Time the compiled and numpy kernel backends on the training hot loops.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints the best-of-``repeat`` wall time per kernel and backend, and the
speed-up of the compiled backend.
"""

import argparse
import time

import numpy as np

from seasurrogate import kernels
from seasurrogate.harness.dataset import build_dataset, normalize
from seasurrogate.harness.training import TrainConfig, train_surrogate


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def cases(rng):
    T, B, H = 64, 3, 20
    lstm_x = rng.standard_normal((T, B, 4 * H))
    lstm_w = 0.1 * rng.standard_normal((4 * H, H))
    gru_x = rng.standard_normal((T, B, 3 * H))
    gru_w = 0.1 * rng.standard_normal((3 * H, H))
    h0 = np.zeros((B, H))
    dh = rng.standard_normal((T, B, H))
    steps = 10_000
    forcing = np.sin(0.5 * np.arange(2 * steps - 1))[:, None] * np.array([1.0, 0.5, 0.2])
    ones, zeros = np.ones(3), np.zeros(3)

    def lstm(k):
        hs, cs, g = k.lstm_forward(lstm_x, lstm_w, h0, h0)
        k.lstm_backward(dh, g, hs, cs, h0, h0, lstm_w)

    def gru(k):
        hs, g = k.gru_forward(gru_x, gru_w, h0)
        k.gru_backward(dh, g, hs, h0, gru_w)

    def rk4(k):
        k.rk4_oscillator(forcing, 0.01, ones, 0.1 * ones, zeros, 4.0 * ones, 0.1 * ones, 0.2, ones, np.zeros(6))

    return {"lstm fwd+bwd (T=64,B=3,H=20)": lstm, "gru fwd+bwd (T=64,B=3,H=20)": gru,
            "rk4 oscillator (10^4 steps)": rk4}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--train-steps", type=int, default=300, help="steps for the end-to-end timing")
    args = parser.parse_args()
    names = kernels.available()
    print(f"backends: {', '.join(names)}")
    rng = np.random.default_rng(0)
    results = {}
    for label, fn in cases(rng).items():
        results[label] = {b: best_of(lambda: fn(kernels.use(b)), args.repeat) for b in names}
    ds = normalize(build_dataset(None, "catamaran-2dof", 4, 4000, seeds=[1, 2, 3, 4]))
    cfg = TrainConfig(train_steps=args.train_steps)
    label = f"catamaran training ({args.train_steps} steps)"
    results[label] = {}
    for b in names:
        kernels.use(b)
        results[label][b] = best_of(lambda: train_surrogate(ds, cfg), 1)
    width = max(map(len, results))
    print(f"{'kernel':<{width}}  " + "  ".join(f"{b:>10}" for b in names) + "  speed-up")
    for label, row in results.items():
        speed = f"{row['python'] / row['cython']:8.1f}x" if "cython" in row else "       -"
        print(f"{label:<{width}}  " + "  ".join(f"{row[b]:9.4f}s" for b in names) + f"  {speed}")


if __name__ == "__main__":
    main()
