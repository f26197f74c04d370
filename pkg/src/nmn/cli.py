"""Command-line entry point: experiments, probes, and benchmarks.

Subcommands
    verify   run every verification probe; exit 1 on any failure
    xor      XOR certificate plus a response grid of the trained unit
    mnist    train the prototype classifiers on user-supplied IDX files
    lm       train a toy character-level language model
    bench    FLOP accounting and wall-clock micro-benchmarks

Exit status: 0 success, 1 probe or experiment failure, 2 usage error.
Every run writes a ``<command>_config.txt`` with the resolved settings
next to its outputs.

Only the standard library is imported at module scope: ``--threads`` must
pin the BLAS thread-pool environment before numpy first loads, which is
why all numerical imports happen inside the command handlers.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

_THREAD_VARS = ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS")


def _apply_threads(argv):
    """Pin BLAS threads from --threads (default 1) before numpy is imported."""
    threads = "1"
    for i, a in enumerate(argv):
        if a == "--threads" and i + 1 < len(argv):
            threads = argv[i + 1]
        elif a.startswith("--threads="):
            threads = a.split("=", 1)[1]
    for var in _THREAD_VARS:
        os.environ[var] = threads


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nmn",
        description="Yat-kernel networks: verification probes, experiments, benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="run seed")
        p.add_argument("--eps", type=float, default=None,
                       help="kernel stability constant (command default if omitted)")
        p.add_argument("--out", type=str, default="out", help="output directory")
        p.add_argument("--threads", type=int, default=1,
                       help="BLAS thread cap (default 1 for determinism)")

    p = sub.add_parser("verify", help="run all verification probes")
    common(p)
    p.add_argument("--samples", type=int, default=10_000,
                   help="Monte Carlo sample count per probe")

    p = sub.add_parser("xor", help="XOR separation certificate")
    common(p)
    p.add_argument("--steps", type=int, default=500, help="training steps")
    p.add_argument("--grid-resolution", type=int, default=81,
                   help="response grid resolution")

    p = sub.add_parser("mnist", help="10-prototype classifier experiment")
    common(p)
    p.add_argument("--mnist-images", type=str, required=True,
                   help="path to IDX training images")
    p.add_argument("--mnist-labels", type=str, required=True,
                   help="path to IDX training labels")
    p.add_argument("--mnist-test-images", type=str, default=None,
                   help="path to IDX test images (omit to hold out 10k)")
    p.add_argument("--mnist-test-labels", type=str, default=None,
                   help="path to IDX test labels")
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=128)

    p = sub.add_parser("lm", help="toy character-level language model")
    common(p)
    p.add_argument("--corpus", type=str, required=True, help="UTF-8 text file")
    p.add_argument("--kind", type=str, default="aether",
                   choices=["aether", "standard", "aether-preln", "aether-postln"])
    p.add_argument("--steps", type=int, default=300)
    p.add_argument("--lr", type=float, default=3e-4)
    p.add_argument("--batch-size", type=int, default=4)

    p = sub.add_parser("bench", help="FLOP accounting and timing")
    common(p)
    p.add_argument("--bench-b", type=int, default=256, help="batch rows")
    p.add_argument("--bench-n", type=int, default=256, help="units")
    p.add_argument("--bench-d", type=str, default="256,768",
                   help="comma-separated input widths")
    p.add_argument("--repeats", type=int, default=9, help="timing repeats")
    return parser


def _write_config(out_dir: Path, command: str, args: argparse.Namespace):
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [f"{k}={v}" for k, v in sorted(vars(args).items()) if k != "command"]
    (out_dir / f"{command}_config.txt").write_text(
        "\n".join([f"command={command}"] + lines) + "\n", encoding="utf-8")


def cmd_verify(args) -> int:
    from .probes import ProbeConfig, run_all

    out = Path(args.out)
    cfg = ProbeConfig(seed=args.seed, n_samples=args.samples)
    if args.eps is not None:
        cfg.eps_grid = (args.eps,)
    reports = run_all(cfg)
    lines = [r.to_json_line() for r in reports]
    (out / "verify_report.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
    for r in reports:
        print(f"[{r.status}] {r.probe}: measured={r.measured:.6g} "
              f"bound={r.bound:.6g} tol={r.tolerance:.6g}")
    failed = [r for r in reports if not r.passed]
    print(f"{len(reports) - len(failed)}/{len(reports)} probes passed")
    return 1 if failed else 0


def cmd_xor(args) -> int:
    import numpy as np

    from .data import write_csv
    from .kernel import KernelConfig, yat_batch
    from .probes import xor_certificate

    out = Path(args.out)
    eps = 0.01 if args.eps is None else args.eps
    report = xor_certificate(eps=eps, seed=args.seed, steps=args.steps)
    (out / "xor_certificate.json").write_text(report.to_json_line() + "\n",
                                              encoding="utf-8")
    print(f"[{report.status}] xor: table={report.details['table']}")
    if report.details.get("trained"):
        w = np.asarray(report.details["trained"]["weights"])
        tau = report.details["trained"]["threshold"]
        res = args.grid_resolution
        xs = np.linspace(-0.5, 1.5, res)
        gx, gy = np.meshgrid(xs, xs)
        pts = np.column_stack([gx.ravel(), gy.ravel()])
        resp, _ = yat_batch(pts, w[None, :], None, KernelConfig(eps=eps))
        labels = (resp[:, 0] > tau).astype(float)
        write_csv(out / "xor_grid.csv", ["x", "y", "resp", "label"],
                  np.column_stack([pts, resp[:, 0], labels]))
    return 0 if report.passed else 1


def cmd_mnist(args) -> int:
    import numpy as np

    from .data import Dataset, load_mnist_idx, write_csv
    from .train import TrainConfig, invert_prototypes_eval, train_classifier

    out = Path(args.out)
    eps = 1e-6 if args.eps is None else args.eps
    train = load_mnist_idx(args.mnist_images, args.mnist_labels)
    if args.mnist_test_images:
        test = load_mnist_idx(args.mnist_test_images, args.mnist_test_labels)
    else:
        split = max(len(train) - 10_000, len(train) // 2)
        test = Dataset(train.inputs[split:], train.labels[split:], split="test")
        train = Dataset(train.inputs[:split], train.labels[:split])
    cfg = TrainConfig(epochs=args.epochs, batch_size=args.batch_size,
                      lr=args.lr, seed=args.seed)
    summary = {}
    for kind in ("nmn", "linear"):
        log, head = train_classifier(kind, train, cfg, eval_data=test, eps=eps)
        log.write_csv(out / f"mnist_metrics_{kind}.csv")
        write_csv(out / f"mnist_prototypes_{kind}.csv",
                  [f"p{i}" for i in range(head.prototypes.shape[1])],
                  head.prototypes)
        original, inverted = invert_prototypes_eval(head, test)
        init_norm = log.rows[0][4]
        final_norm = head.prototype_norm_mean()
        summary[kind] = {
            "test_accuracy": original,
            "inverted_accuracy": inverted,
            "prototype_norm_change_pct":
                100.0 * (final_norm - init_norm) / init_norm,
            "alpha_final": None if math.isnan(head.alpha) else head.alpha,
        }
        print(f"{kind}: acc={original:.4f} inverted={inverted:.4f} "
              f"norm_change={summary[kind]['prototype_norm_change_pct']:+.2f}% "
              f"alpha={summary[kind]['alpha_final']}")
    (out / "mnist_summary.json").write_text(json.dumps(summary, indent=2) + "\n",
                                            encoding="utf-8")
    return 0


def cmd_lm(args) -> int:
    from .data import char_tokenize
    from .train import TrainConfig, train_lm

    out = Path(args.out)
    eps = 1e-6 if args.eps is None else args.eps
    text = Path(args.corpus).read_bytes()
    corpus = char_tokenize(text)
    cfg = TrainConfig(steps=args.steps, batch_size=args.batch_size,
                      lr=args.lr, seed=args.seed)
    run = train_lm(args.kind, corpus, cfg, eps=eps)
    run.log.write_csv(out / f"lm_{args.kind}.csv")
    summary = {
        "kind": args.kind,
        "vocab_size": corpus.vocab_size,
        "uniform_baseline": math.log(corpus.vocab_size),
        "final_val_loss": run.final_val_loss,
        "diverged": run.diverged,
        "nan_seen": run.nan_seen,
        "norm_layers": run.model.norm_layer_count(),
    }
    (out / f"lm_{args.kind}_summary.json").write_text(
        json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    status = "DIVERGED" if run.diverged else "converged"
    print(f"lm[{args.kind}]: final val loss {run.final_val_loss:.4f} "
          f"(uniform {summary['uniform_baseline']:.4f}) {status}")
    return 0


def cmd_bench(args) -> int:
    from .bench import (bench_matched, bench_scaling, flop_ratios,
                        flops_per_neuron, forward_flops_linear,
                        forward_flops_yat, peak_transient_bytes)

    out = Path(args.out)
    B, n = args.bench_b, args.bench_n
    dims = [int(d) for d in args.bench_d.split(",")]
    report = {"B": B, "n": n, "per_width": {}, "scaling": None}
    for d in dims:
        timing = bench_matched(B, n, d, seed=args.seed, repeats=args.repeats)
        entry = {
            "flops_per_neuron": flops_per_neuron(d),
            "flop_ratios": flop_ratios(d),
            "forward_flops_yat": forward_flops_yat(B, n, d),
            "forward_flops_linear_gelu": forward_flops_linear(B, n, d, act_cost=14),
            "peak_transient_bytes": peak_transient_bytes(B, n, d),
            "yat_seconds": timing.yat_seconds,
            "linear_gelu_seconds": timing.linear_gelu_seconds,
            "wallclock_ratio": timing.wallclock_ratio,
        }
        report["per_width"][str(d)] = entry
        ratios = entry["flop_ratios"]
        print(f"d={d}: flops(yat_opt)={entry['flops_per_neuron']['yat_optimized']} "
              f"ratio_vs_relu={ratios['yat_vs_linear_relu']:.4f} "
              f"ratio_vs_gelu={ratios['yat_vs_linear_gelu']:.4f} "
              f"wallclock_ratio={entry['wallclock_ratio']:.3f}")
    report["scaling"] = bench_scaling(base=(B, n, dims[0]), seed=args.seed,
                                      repeats=args.repeats)
    for axis, rec in report["scaling"]["axes"].items():
        print(f"scaling {axis} x{report['scaling']['factor']}: "
              f"time ratio {rec['ratio']:.2f}")
    (out / "bench_report.json").write_text(json.dumps(report, indent=2) + "\n",
                                           encoding="utf-8")
    return 0


_COMMANDS = {
    "verify": cmd_verify,
    "xor": cmd_xor,
    "mnist": cmd_mnist,
    "lm": cmd_lm,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    _apply_threads(argv)
    parser = _build_parser()
    args = parser.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_config(out, args.command, args)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
