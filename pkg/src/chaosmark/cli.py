"""Command-line interface.

Subcommands: embed, detect, verify-mode, strategy-test, attack, bench,
quality.  Detection reports its verdict through the exit code (0 marked,
1 not marked, 2 error); output files are written atomically.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import __version__
from .attacks import apply_attack, mse, parse_attack_spec, psnr
from .boolnet import BooleanMap
from .chain import (
    build_iteration_graph,
    convergence_q,
    empirical_uniformity,
    is_doubly_stochastic,
    is_strongly_connected,
    markov_matrix,
    point_mass,
    regularity_exponent,
)
from .evaluation import load_plan, run_plan
from .netpbm import load_message_bits, load_pgm, write_pgm
from .scheme import EmbedConfig, default_threshold, detect, embed
from .strategies import ciis_source, cids_source, read_key_file
from .util import atomic_write_bytes

log = logging.getLogger("chaosmark")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="chaosmark",
        description="Chaos-driven bit-flip watermarking for grayscale images",
    )
    parser.add_argument("--version", action="version", version=f"chaosmark {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", help="embed a message into a host image")
    p.add_argument("--host", required=True)
    p.add_argument("--message", required=True, help="PBM/PGM bit image or 0/1 text file")
    p.add_argument("--key", required=True, help="key file shared with detection")
    p.add_argument("--domain", choices=("spatial", "dwt", "dct"), default=None)
    p.add_argument("--mode", choices=("neg", "fqq"), default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("detect", help="decide whether a suspect image carries the mark")
    p.add_argument("--host", required=True)
    p.add_argument("--message", required=True)
    p.add_argument("--key", required=True)
    p.add_argument("--domain", choices=("spatial", "dwt", "dct"), default=None)
    p.add_argument("--mode", choices=("neg", "fqq"), default=None)
    p.add_argument("--suspect", required=True)
    p.add_argument("--threshold", type=float, default=None, help="difference-rate cutoff in percent")

    p = sub.add_parser("verify-mode", help="check the chain hypotheses for a mode at size l")
    p.add_argument("--mode", choices=("neg", "fqq"), required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--eps", type=float, default=1e-4)
    p.add_argument("--cap", type=int, default=10000)

    p = sub.add_parser("strategy-test", help="empirical uniformity of a strategy adapter")
    p.add_argument("--adapter", choices=("ciis", "cids"), required=True)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--q", type=int, default=64)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.4117)

    p = sub.add_parser("attack", help="apply an attack spec to an image")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--spec", required=True, help="e.g. crop:36, jpeg:70, j2k:8, rot:10")
    p.add_argument("--out", required=True)

    p = sub.add_parser("bench", help="run an experiment plan and write CSV results")
    p.add_argument("--plan", required=True)

    p = sub.add_parser("quality", help="MSE / PSNR between two images")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    return parser


def _config_from_key_file(args, host_id=None):
    keys = read_key_file(args.key)
    domain = args.domain or keys.domain
    mode = args.mode or keys.mode
    return EmbedConfig(
        domain=domain,
        mode=mode,
        key=keys.key_for(host_id),
        alpha=keys.alpha,
        precision=keys.precision,
    )


def _host_id(path):
    import os

    return os.path.splitext(os.path.basename(path))[0]


def _cmd_embed(args):
    host = load_pgm(args.host)
    message = load_message_bits(args.message)
    config = _config_from_key_file(args, _host_id(args.host))
    marked = embed(host, message, config)
    atomic_write_bytes(args.out, write_pgm(marked))
    lm = config.codec().lsc_count(host.shape)
    print(f"lm={lm} q={config.iteration_multiplier * lm} psnr={psnr(host, marked):.4f}")
    return 0


def _cmd_detect(args):
    host = load_pgm(args.host)
    suspect = load_pgm(args.suspect)
    message = load_message_bits(args.message)
    config = _config_from_key_file(args, _host_id(args.host))
    threshold = args.threshold if args.threshold is not None else default_threshold(config)
    result = detect(host, message, suspect, config, threshold)
    verdict = "watermarked" if result.watermarked else "not-watermarked"
    print(
        f"difference_rate={result.difference_rate:.6f} threshold={result.threshold:g} "
        f"lm={result.lsc_count} verdict={verdict}"
    )
    return 0 if result.watermarked else 1


def _cmd_verify_mode(args):
    if args.l < 1:
        raise ValueError("--l must be >= 1")
    f = BooleanMap.negation(args.l) if args.mode == "neg" else BooleanMap.fqq(args.l)
    graph = build_iteration_graph(f)
    matrix = markov_matrix(f)
    connected = is_strongly_connected(graph)
    doubly = is_doubly_stochastic(matrix)
    print(f"mode={args.mode} l={args.l} states={1 << args.l}")
    print(f"strongly_connected={str(connected).lower()}")
    print(f"doubly_stochastic={str(doubly).lower()}")
    exponent = regularity_exponent(matrix)
    print(f"regularity_exponent={'none' if exponent is None else exponent}")
    conv = convergence_q(matrix, point_mass(args.l, 0), args.eps, cap=args.cap)
    if conv is None:
        print(f"convergence_q=none eps={args.eps:g} cap={args.cap}")
    else:
        q, gap = conv
        print(f"convergence_q={q} gap={gap:.6e} eps={args.eps:g}")
    return 0


def _cmd_strategy_test(args):
    f = BooleanMap.negation(args.n)
    trials = args.trials if args.trials is not None else 100 * (1 << args.n) * 8
    if args.adapter == "ciis":
        source = ciis_source(args.q, alpha=args.alpha)
        q = args.q
    else:
        source = cids_source()
        q = args.n + 1  # content-dependent strategies carry l + 1 terms
    hist, chi2 = empirical_uniformity(f, source, q, trials, args.seed)
    print(f"adapter={args.adapter} n={args.n} q={q} trials={trials}")
    print("histogram=" + ",".join(str(int(c)) for c in hist))
    print(f"chi_square={chi2:.4f} dof={hist.size - 1}")
    return 0


def _cmd_attack(args):
    img = load_pgm(args.input)
    spec = parse_attack_spec(args.spec)
    out = apply_attack(img, spec)
    atomic_write_bytes(args.out, write_pgm(out))
    print(f"attack={spec.label()} psnr={psnr(img, out):.4f}")
    return 0


def _cmd_bench(args):
    plan = load_plan(args.plan)
    points, curves = run_plan(plan)
    best = max(points, key=lambda p: p.tpr - p.fpr)
    print(f"wrote results to {plan.output_dir}")
    print(
        f"roc points={len(points)} best threshold={best.threshold:g} "
        f"tpr={best.tpr:.6f} fpr={best.fpr:.6f}"
    )
    for kind, rows in curves.items():
        print(f"curve {kind}: {len(rows)} parameter points")
    return 0


def _cmd_quality(args):
    a = load_pgm(args.a)
    b = load_pgm(args.b)
    err = mse(a, b)
    ratio = psnr(a, b)
    label = "inf" if np.isinf(ratio) else f"{ratio:.4f}"
    print(f"mse={err:.6f} psnr={label}")
    return 0


_COMMANDS = {
    "embed": _cmd_embed,
    "detect": _cmd_detect,
    "verify-mode": _cmd_verify_mode,
    "strategy-test": _cmd_strategy_test,
    "attack": _cmd_attack,
    "bench": _cmd_bench,
    "quality": _cmd_quality,
}


def run(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
