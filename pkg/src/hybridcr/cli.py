"""Command line: ``hybridcr sweep`` and ``hybridcr single``."""
import argparse
import json
import os
import sys

import numpy as np

from . import harness
from .channel import build_scenario, snr_to_noise
from .digital import digital_mmse_postcoder, solve_digital_precoder
from .errors import ConfigurationError, HybridCRError
from .hybrid_frob import solve_hybrid_frobenius
from .hybrid_mi import solve_hybrid_mi
from .hybrid_rx import solve_hybrid_postcoder
from .metrics import link_report


def parse_snr_range(text):
    """``a:b:step`` (inclusive of ``b``) or a single value."""
    parts = text.split(":")
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad SNR range {text!r}") from None
    if len(values) == 1:
        return (values[0],)
    if len(values) != 3 or values[2] <= 0 or values[1] < values[0]:
        raise argparse.ArgumentTypeError("SNR range must be a:b:step with b >= a, step > 0")
    a, b, step = values
    n = int(np.floor((b - a) / step + 1e-9)) + 1
    return tuple(round(a + k * step, 10) for k in range(n))


def parse_methods(text):
    methods = tuple(m.strip() for m in text.split(",") if m.strip())
    unknown = set(methods) - set(harness.METHODS)
    if not methods or unknown:
        raise argparse.ArgumentTypeError(
            f"methods must be a comma list from {', '.join(harness.METHODS)}")
    return methods


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hybridcr", description="Hybrid precoding sweeps for cognitive-radio MIMO links.")
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="Monte Carlo sweep over SNR")
    sw.add_argument("--config", required=True, help="JSON sweep specification")
    sw.add_argument("--out", default=".", help="output directory (default: .)")
    sw.add_argument("--format", choices=("csv", "json"), default="csv")
    sw.add_argument("--trials", type=int, help="override num_trials")
    sw.add_argument("--seed", type=int, help="override the base seed")
    sw.add_argument("--methods", type=parse_methods, help="comma-separated methods")
    sw.add_argument("--snr", type=parse_snr_range, help="SNR grid a:b:step in dB")
    sw.add_argument("--workers", type=int, help="parallel trial workers")

    si = sub.add_parser("single", help="one scenario, one method, verbose")
    si.add_argument("--config", required=True)
    si.add_argument("--seed", type=int, required=True)
    si.add_argument("--snr", type=float, required=True)
    si.add_argument("--method", choices=harness.METHODS, required=True)
    return parser


def _spec_from_args(args):
    spec = harness.load_spec(args.config)
    changes = {}
    if getattr(args, "trials", None) is not None:
        changes["num_trials"] = args.trials
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "methods", None):
        changes["methods"] = args.methods
    if getattr(args, "snr", None):
        changes["snr_grid_db"] = args.snr
    if getattr(args, "workers", None) is not None:
        changes["workers"] = args.workers
    return spec.replace(**changes) if changes else spec


def cmd_sweep(args):
    spec = _spec_from_args(args)
    result = harness.run_sweep(spec)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"sweep.{args.format}")
    harness.export(result, path, args.format)
    for row in result.summary():
        print(f"{row['method']:<12} snr={row['snr_db']:>6.1f} dB  "
              f"mean SE={row['mean_se']:.4f}  stderr={row['stderr_se']:.4f}  "
              f"ok={row['succeeded']}/{row['trials']}")
    print(f"wrote {path}; failed trials: {result.failures}")
    return 0 if result.failures == 0 else 1


def cmd_single(args):
    spec = harness.load_spec(args.config)
    c = spec.config.replace(sigma_n_sq=snr_to_noise(args.snr, spec.config.P_max))
    scenario = build_scenario(c, args.seed)
    out = {"method": args.method, "snr_db": args.snr, "seed": args.seed}
    digital = solve_digital_precoder(scenario, c.L_s if spec.digital_rank_cap else None)
    if args.method == "digital":
        f = digital.f_d
        w = digital_mmse_postcoder(scenario, f)
        out["trace"] = None
    else:
        if args.method == "hybrid-mi":
            pre, trace = solve_hybrid_mi(scenario, spec.admm, rng_seed=args.seed)
        else:
            pre, trace = solve_hybrid_frobenius(scenario, digital, spec.frob,
                                                rng_seed=args.seed)
        f = pre.matrix
        if spec.receiver == "digital-mmse":
            w = digital_mmse_postcoder(scenario, f)
        else:
            rx = spec.rx
            post, _ = solve_hybrid_postcoder(scenario, pre, rx.beta, rx.eps_g, rx.eps_p2,
                                             rx.n_max, rng_seed=args.seed)
            w = post.matrix
        out["trace"] = trace.to_dict()
    out["report"] = link_report(scenario, f, w).to_dict()
    print(json.dumps(out, indent=2))
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "sweep":
            return cmd_sweep(args)
        return cmd_single(args)
    except ConfigurationError as exc:
        print(f"hybridcr: configuration error: {exc}", file=sys.stderr)
        return 2
    except HybridCRError as exc:
        print(f"hybridcr: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
