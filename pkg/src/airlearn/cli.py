"""Command-line entry point: ``airlearn run | gen-features | inspect``.

Exit codes: 0 success, 2 config error, 3 scenario/guard violation, 4 I/O error.
"""

import argparse
import dataclasses
import json
import math
import os
import sys

import numpy as np

from .classifier import ClassifierState, fit_air, fit_baseline, fold_phase, observe_batch, write_weights
from .config import load_config
from .errors import ClassReappearedError, ConfigError, FormatError, ScenarioError
from .features import BufferLayer, FeatureSet, project_set, read_features, synth_generate, write_features
from .metrics import EvalReport, phase_accuracy
from .scenarios import build_ltcil, build_siblurry, longtail_counts

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SCENARIO = 3
EXIT_IO = 4

SUMMARY_METRICS = ("a_avg", "a_last_macro", "a_last_micro", "a_auc")


def _log(quiet, *args):
    if not quiet:
        print(*args, file=sys.stderr)


def pool_counts(features):
    if features.imbalance_ratio is None:
        return np.full(features.num_classes, features.samples_per_class, dtype=np.int64)
    return longtail_counts(features.num_classes, features.samples_per_class, features.imbalance_ratio)


def load_pool(cfg, seed):
    """Raw or buffered feature pool for one seed."""
    if cfg.features.source == "file":
        pool = read_features(cfg.features.path)
    else:
        pool = synth_generate(cfg.features.synthetic_spec(seed), pool_counts(cfg.features))
    if cfg.buffer is not None:
        bseed = cfg.buffer.seed if cfg.buffer.seed is not None else seed
        pool = project_set(BufferLayer(pool.dim, cfg.buffer.out_dim, bseed), pool)
    return pool


def stratified_split(pool, test_fraction, seed):
    """Per-class split; returns (train, test), each keeping the pool's relative order."""
    rng = np.random.default_rng([seed, 1])
    test_idx = []
    for label in np.unique(pool.y):
        members = np.nonzero(pool.y == label)[0]
        n_test = int(math.floor(test_fraction * len(members) + 0.5))
        test_idx.append(rng.permutation(members)[:n_test])
    is_test = np.zeros(len(pool), dtype=bool)
    if test_idx:
        is_test[np.concatenate(test_idx)] = True
    return pool.take(np.nonzero(~is_test)[0]), pool.take(np.nonzero(is_test)[0])


def _evaluate(w, test, seen):
    subset = test.take(np.nonzero(np.isin(test.y, sorted(seen)))[0])
    if len(subset) == 0:
        return None
    return subset, phase_accuracy(w, subset, macro=True), phase_accuracy(w, subset, macro=False)


def run_seed(cfg, seed, quiet=True):
    """Train and evaluate one seed; returns (EvalReport, final Weights)."""
    pool = load_pool(cfg, seed)
    train, test = stratified_split(pool, cfg.eval.test_split_fraction, seed)
    scen = cfg.scenario.build_config(seed)
    stream = build_ltcil(train, scen) if cfg.scenario.kind == "lt-cil" else build_siblurry(train, scen)

    mode = "cil" if cfg.method == "air-cil" else "gcil"
    fit = fit_baseline if cfg.method == "baseline" else fit_air
    state = ClassifierState(train.dim, cfg.gamma, mode)
    streaming = cfg.scenario.kind == "si-blurry"
    interval = cfg.eval.interval_samples

    seen = set()
    macro, micro, auc_points = [], [], []
    samples_seen = 0
    w = None
    last_eval = None
    for k, phase in enumerate(stream.phases, start=1):
        chunks = [phase]
        if streaming:
            # cut the phase at global interval boundaries
            cuts = [c - samples_seen for c in range((samples_seen // interval + 1) * interval,
                                                     samples_seen + len(phase), interval)]
            chunks = [phase.take(np.arange(a, b)) for a, b in zip([0] + cuts, cuts + [len(phase)])]
        for chunk in chunks:
            try:
                observe_batch(state, chunk)
            except ClassReappearedError as exc:
                raise ClassReappearedError(exc.label, phase=k) from None
            seen.update(np.unique(chunk.y).tolist())
            samples_seen += len(chunk)
            if streaming and len(chunk) and samples_seen % interval == 0:
                res = _evaluate(fit(state), test, seen)
                if res is not None:
                    auc_points.append((samples_seen, res[1]))
        if not seen:
            continue
        w = fit(state)
        res = _evaluate(w, test, seen)
        if res is not None:
            last_eval = res
            macro.append(res[1])
            micro.append(res[2])
        if streaming and (not auc_points or auc_points[-1][0] != samples_seen) and k == len(stream.phases):
            if res is not None:
                auc_points.append((samples_seen, res[1]))
        if mode == "cil":
            fold_phase(state)
        _log(quiet, f"seed {seed} phase {k}/{len(stream.phases)}: n={len(phase)} "
                    f"acc_macro={macro[-1] if macro else float('nan'):.4f}")

    if w is None or last_eval is None:
        raise ScenarioError("stream produced no evaluable phase")
    meta = {
        "method": cfg.method,
        "seed": seed,
        "scenario": cfg.scenario.kind,
        "gamma": cfg.gamma,
        "num_phases": len(stream.phases),
        "train_samples": int(sum(len(p) for p in stream.phases)),
        "test_samples": len(last_eval[0]),
    }
    report = EvalReport.build(macro, micro, w, last_eval[0], auc_points if streaming else None, meta)
    return report, w


def aggregate(reports):
    """Mean and standard error (ddof=1 std / sqrt(n); 0 for one seed) per summary metric."""
    out = {"seeds": [r.meta.get("seed") for r in reports], "metrics": {}}
    for name in SUMMARY_METRICS:
        values = [getattr(r, name) for r in reports]
        if any(v is None for v in values):
            continue
        arr = np.asarray(values, dtype=np.float64)
        stderr = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
        out["metrics"][name] = {"mean": float(arr.mean()), "stderr": stderr, "values": arr.tolist()}
    return out


def cmd_run(args):
    cfg = load_config(args.config)
    if args.seed_override is not None:
        cfg = dataclasses.replace(cfg, seeds=(args.seed_override,))
    out_dir = args.out or cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)
    reports = []
    for seed in cfg.seeds:
        report, w = run_seed(cfg, seed, quiet=args.quiet)
        with open(os.path.join(out_dir, f"report_seed{seed}.json"), "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
        write_weights(os.path.join(out_dir, f"weights_seed{seed}.airw"), w)
        reports.append(report)
        _log(args.quiet, f"seed {seed}: a_avg={report.a_avg:.4f} a_last_macro={report.a_last_macro:.4f}")
    agg = aggregate(reports)
    agg["method"] = cfg.method
    with open(os.path.join(out_dir, "aggregate.json"), "w", encoding="utf-8") as fh:
        fh.write(json.dumps(agg, indent=2, sort_keys=True) + "\n")
    if not args.quiet:
        for name, m in agg["metrics"].items():
            print(f"{name:>14}: {m['mean']:.4f} ± {m['stderr']:.4f}")
    return EXIT_OK


def cmd_gen_features(args):
    cfg = load_config(args.config, require_scenario=False)
    if cfg.features.source != "synthetic":
        raise ConfigError("features.source: gen-features needs a synthetic source")
    seed = args.seed_override if args.seed_override is not None else cfg.seeds[0]
    counts = pool_counts(cfg.features)
    fs = synth_generate(cfg.features.synthetic_spec(seed), counts)
    if not args.out:
        raise ConfigError("--out: output file path is required")
    write_features(args.out, fs)
    _log(args.quiet, f"wrote {len(fs)} samples of dimension {fs.dim} to {args.out}")
    return EXIT_OK


def format_report(d, top=5):
    lines = []
    if "metrics" in d and "confusion" not in d:
        lines.append(f"aggregate over seeds {d.get('seeds')} ({d.get('method', '?')})")
        for name, m in d["metrics"].items():
            lines.append(f"  {name:<14} {m['mean']:.4f} ± {m['stderr']:.4f}")
        return "\n".join(lines)
    report = EvalReport.from_dict(d)

    def fmt(v):
        return "n/a" if v is None else f"{v:.4f}"

    if report.meta:
        lines.append("  ".join(f"{k}={v}" for k, v in sorted(report.meta.items())))
    lines.append(f"a_avg          {fmt(report.a_avg)}")
    lines.append(f"a_last_macro   {fmt(report.a_last_macro)}")
    lines.append(f"a_last_micro   {fmt(report.a_last_micro)}")
    lines.append(f"a_auc          {fmt(report.a_auc)}")
    cm = np.asarray(report.confusion, dtype=np.int64)
    if cm.size:
        lines.append(f"macro recall from confusion: {report.macro_from_confusion():.4f}")
        off = cm.copy()
        np.fill_diagonal(off, 0)
        flat = np.argsort(-off, axis=None, kind="stable")[:top]
        pairs = [(int(i // cm.shape[1]), int(i % cm.shape[1])) for i in flat]
        pairs = [(t, p) for t, p in pairs if off[t, p] > 0]
        if pairs:
            lines.append("top confusions (true -> predicted: count):")
            lines.extend(f"  {t} -> {p}: {off[t, p]}" for t, p in pairs)
    return "\n".join(lines)


def cmd_inspect(args):
    with open(args.report, encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{args.report}: not valid JSON ({exc})") from None
    print(format_report(d, top=args.top))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="airlearn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="train and evaluate a configured experiment")
    run.add_argument("--config", required=True)
    run.add_argument("--seed-override", type=int, default=None)
    run.add_argument("--out", default=None, help="output directory (overrides output_dir)")
    run.add_argument("--quiet", action="store_true")
    run.set_defaults(func=cmd_run)

    gen = sub.add_parser("gen-features", help="write a synthetic feature pool to an AIRF file")
    gen.add_argument("--config", required=True)
    gen.add_argument("--seed-override", type=int, default=None)
    gen.add_argument("--out", required=True, help="output AIRF file")
    gen.add_argument("--quiet", action="store_true")
    gen.set_defaults(func=cmd_gen_features)

    ins = sub.add_parser("inspect", help="summarize a JSON report")
    ins.add_argument("report")
    ins.add_argument("--top", type=int, default=5)
    ins.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except (OSError, FormatError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
