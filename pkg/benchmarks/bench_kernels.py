"""Compare the compiled and numpy accumulation kernels.

    python benchmarks/bench_kernels.py [--rows 2000] [--dims 64 256 1024] [--repeat 3]

Each case accumulates ``rows`` samples one at a time into an f x f
auto-correlation matrix (the inner loop of ``observe_batch``), then a full
100-class long-tailed stream is pushed through ``observe_batch`` with each
backend swapped in.
"""

import argparse
import time

import numpy as np

from airlearn import _backend, _fallback, classifier
from airlearn.features import BufferLayer, SyntheticSpec, project_set, synth_generate
from airlearn.scenarios import longtail_counts

try:
    from airlearn import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_accumulate(impl, X, repeat):
    f = X.shape[1]

    def go():
        impl.accumulate_rows(np.zeros((f, f)), np.zeros(f), X)

    return best_of(go, repeat)


def bench_stream(impl, fs, repeat):
    saved = _backend.accumulate_rows
    _backend.accumulate_rows = impl.accumulate_rows
    try:
        return best_of(lambda: classifier.observe_batch(classifier.ClassifierState(fs.dim, 1.0), fs), repeat)
    finally:
        _backend.accumulate_rows = saved


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=2000)
    parser.add_argument("--dims", type=int, nargs="+", default=[64, 256, 1024])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    impls = [("python", _fallback)] + ([("cython", _kernels)] if _kernels is not None else [])
    if _kernels is None:
        print("compiled extension not built; only the fallback is timed")

    rng = np.random.default_rng(0)
    print(f"{'case':<32}" + "".join(f"{name:>12}" for name, _ in impls) + f"{'speedup':>10}")
    for f in args.dims:
        X = rng.standard_normal((args.rows, f))
        t = [bench_accumulate(impl, X, args.repeat) for _, impl in impls]
        speed = f"{t[0] / t[-1]:>9.1f}x" if len(t) > 1 else ""
        print(f"{f'accumulate {args.rows} rows, f={f}':<32}" + "".join(f"{v:>11.4f}s" for v in t) + speed)

    counts = longtail_counts(100, 500, 0.01)
    spec = SyntheticSpec(100, 32, class_mean_radius=4.0, seed=0)
    fs = project_set(BufferLayer(32, 256, 0), synth_generate(spec, counts))
    t = [bench_stream(impl, fs, args.repeat) for _, impl in impls]
    speed = f"{t[0] / t[-1]:>9.1f}x" if len(t) > 1 else ""
    print(f"{f'LT stream {len(fs)} samples, f=256':<32}" + "".join(f"{v:>11.4f}s" for v in t) + speed)


if __name__ == "__main__":
    main()
