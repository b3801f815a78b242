"""Threshold calibration and robustness experiments over an image corpus.

Three sets drive the calibration: W holds one marked copy per host, WA the
attacked marked copies and A the same attacks applied to the raw hosts.
Sweeping the decision threshold over WA and A yields one ROC point per
threshold.  Robustness curves report the mean carrier difference rate per
embedding variant along an attack parameter grid.

Every run is a pure function of the corpus, the key file and the plan, so
re-running a plan reproduces its CSV outputs byte for byte.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .attacks import AttackSpec, apply_attack, parse_attack_spec, psnr
from .netpbm import load_message_bits, load_pgm
from .scheme import EmbedConfig, expected_mark, extract_lscs
from .strategies import generate_key_material, read_key_file, write_key_file
from .util import atomic_write_bytes

__all__ = [
    "ExperimentPlan",
    "AttackRecord",
    "RocPoint",
    "load_plan",
    "build_sets",
    "difference_rates",
    "roc_sweep",
    "robustness_curve",
    "run_plan",
    "CURVE_VARIANTS",
]

# column order of the robustness curve files
CURVE_VARIANTS = (("dwt", "neg"), ("dwt", "fqq"), ("dct", "neg"), ("dct", "fqq"))


@dataclass
class ExperimentPlan:
    corpus: list  # (host_id, path) pairs, sorted by id
    domain: str
    mode: str
    key_file: str
    message_bits: tuple
    attack_specs: list
    thresholds: list
    curve_families: dict
    output_dir: str
    key_seed: int | None = None


@dataclass
class AttackRecord:
    source_id: str
    spec: AttackSpec
    image: np.ndarray
    fidelity_psnr: float
    from_marked: bool


@dataclass(frozen=True)
class RocPoint:
    threshold: float
    tp: int
    fp: int
    tn: int
    fn: int
    tpr: float
    fpr: float


def _parse_thresholds(text):
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.replace(",", " ").split()]


def _parse_grid(text):
    return [float(v) for v in text.replace(",", " ").split()]


def load_plan(path):
    """Read an experiment plan (INI sections: corpus, embed, attacks, roc,
    curves, output); relative paths resolve against the plan file."""
    import configparser

    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise FileNotFoundError(path)
    base = os.path.dirname(os.path.abspath(path))

    def resolve(p):
        return p if os.path.isabs(p) else os.path.join(base, p)

    corpus_dir = resolve(parser.get("corpus", "dir"))
    pattern = parser.get("corpus", "pattern", fallback="*.pgm")
    import fnmatch

    names = sorted(
        n for n in os.listdir(corpus_dir) if fnmatch.fnmatch(n, pattern)
    )
    if not names:
        raise ValueError(f"no corpus images matching {pattern!r} in {corpus_dir}")
    corpus = [(os.path.splitext(n)[0], os.path.join(corpus_dir, n)) for n in names]

    domain = parser.get("embed", "domain")
    mode = parser.get("embed", "mode")
    key_file = resolve(parser.get("embed", "key_file"))
    key_seed = parser.getint("embed", "key_seed", fallback=None)
    if parser.has_option("embed", "message"):
        message = load_message_bits(resolve(parser.get("embed", "message")))
    elif parser.has_option("embed", "message_bits"):
        message = tuple(
            int(c) for c in parser.get("embed", "message_bits") if c in "01"
        )
    else:
        raise ValueError("plan misses [embed] message or message_bits")

    specs = [
        parse_attack_spec(tok)
        for tok in parser.get("attacks", "specs").replace(",", " ").split()
    ]
    if not specs:
        raise ValueError("plan carries an empty attack list")

    thresholds = _parse_thresholds(parser.get("roc", "thresholds", fallback="0..55"))
    curve_families = {}
    if parser.has_section("curves"):
        for kind, grid in parser.items("curves"):
            curve_families[kind] = _parse_grid(grid)
    output_dir = resolve(parser.get("output", "dir", fallback="results"))

    return ExperimentPlan(
        corpus=corpus,
        domain=domain,
        mode=mode,
        key_file=key_file,
        message_bits=message,
        attack_specs=specs,
        thresholds=thresholds,
        curve_families=curve_families,
        output_dir=output_dir,
        key_seed=key_seed,
    )


def _config_for(keys, domain, mode, host_id):
    return EmbedConfig(
        domain=domain,
        mode=mode,
        key=keys.key_for(host_id),
        alpha=keys.alpha,
        precision=keys.precision,
    )


def build_sets(hosts, message, keys, domain, mode, attack_specs):
    """Marked, marked-then-attacked and attacked-only sets with provenance."""
    from .scheme import embed

    marked = []
    wa = []
    a = []
    for host_id, host in hosts:
        config = _config_for(keys, domain, mode, host_id)
        z = embed(host, message, config)
        marked.append((host_id, z))
        for spec in attack_specs:
            attacked = apply_attack(z, spec)
            wa.append(
                AttackRecord(host_id, spec, attacked, psnr(z, attacked), True)
            )
            attacked_raw = apply_attack(host, spec)
            a.append(
                AttackRecord(host_id, spec, attacked_raw, psnr(host, attacked_raw), False)
            )
    return marked, wa, a


def difference_rates(hosts, message, keys, domain, mode, records):
    """Carrier difference rate of every record against its source's mark.

    The expected mark of each host is computed once and reused, which is the
    same comparison :func:`chaosmark.scheme.detect` performs record by
    record.
    """
    host_by_id = dict(hosts)
    marks = {}
    rates = np.empty(len(records), dtype=np.float64)
    for i, record in enumerate(records):
        host_id = record.source_id
        if host_id not in marks:
            config = _config_for(keys, domain, mode, host_id)
            marks[host_id] = (expected_mark(host_by_id[host_id], message, config), config)
        mark, config = marks[host_id]
        observed = extract_lscs(record.image, config)
        rates[i] = 100.0 * np.count_nonzero(mark != observed) / mark.size
    return rates


def roc_sweep(rates_wa, rates_a, thresholds):
    """Tally the four decision cases at every threshold (strict compare)."""
    points = []
    n_wa = len(rates_wa)
    n_a = len(rates_a)
    if n_wa == 0 or n_a == 0:
        raise ValueError("both WA and A sets must be non-empty")
    for t in thresholds:
        tp = int(np.count_nonzero(rates_wa < t))
        fn = n_wa - tp
        fp = int(np.count_nonzero(rates_a < t))
        tn = n_a - fp
        points.append(
            RocPoint(
                threshold=float(t),
                tp=tp,
                fp=fp,
                tn=tn,
                fn=fn,
                tpr=tp / n_wa,
                fpr=fp / n_a,
            )
        )
    return points


def robustness_curve(hosts, message, keys, kind, grid):
    """Mean difference rate per embedding variant along one attack family.

    Returns rows ``(param, {variant: mean_rate})`` over the four standard
    domain/mode variants.
    """
    marked = {}
    for variant in CURVE_VARIANTS:
        domain, mode = variant
        entries = []
        for host_id, host in hosts:
            config = _config_for(keys, domain, mode, host_id)
            from .scheme import embed

            z = embed(host, message, config)
            mark = expected_mark(host, message, config)
            entries.append((z, mark, config))
        marked[variant] = entries
    rows = []
    for param in grid:
        spec = AttackSpec(kind, float(param))
        means = {}
        for variant in CURVE_VARIANTS:
            vals = []
            for z, mark, config in marked[variant]:
                attacked = apply_attack(z, spec)
                observed = extract_lscs(attacked, config)
                vals.append(100.0 * np.count_nonzero(mark != observed) / mark.size)
            means[variant] = float(np.mean(vals))
        rows.append((param, means))
    return rows


def _format_param(value):
    return f"{int(value)}" if value == int(value) else f"{value:g}"


def roc_csv(points):
    lines = ["threshold,tp,fp,tn,fn,tpr,fpr"]
    for p in points:
        lines.append(
            f"{_format_param(p.threshold)},{p.tp},{p.fp},{p.tn},{p.fn},"
            f"{p.tpr:.6f},{p.fpr:.6f}"
        )
    return "\n".join(lines) + "\n"


def curve_csv(rows):
    header = "param," + ",".join(f"{d}_{m}" for d, m in CURVE_VARIANTS)
    lines = [header]
    for param, means in rows:
        cells = ",".join(f"{means[v]:.6f}" for v in CURVE_VARIANTS)
        lines.append(f"{_format_param(param)},{cells}")
    return "\n".join(lines) + "\n"


def manifest_text(plan, hosts, wa, a):
    lines = ["# chaosmark bench manifest"]
    lines.append(f"embedding = {plan.domain}/{plan.mode}")
    lines.append(f"key_file = {os.path.basename(plan.key_file)}")
    lines.append(f"message_bits = {len(plan.message_bits)}")
    lines.append(f"hosts = {len(hosts)}")
    lines.append(f"attacks = {len(plan.attack_specs)}")
    lines.append(f"set_sizes W={len(hosts)} WA={len(wa)} A={len(a)}")
    for record in wa:
        lines.append(
            f"WA {record.source_id} {record.spec.label()} psnr={record.fidelity_psnr:.4f}"
        )
    for record in a:
        lines.append(
            f"A {record.source_id} {record.spec.label()} psnr={record.fidelity_psnr:.4f}"
        )
    return "\n".join(lines) + "\n"


def run_plan(plan):
    """Execute a plan: build sets, sweep the ROC, write every CSV.

    Returns the ROC points and curve rows keyed by attack family.
    """
    hosts = [(host_id, load_pgm(path)) for host_id, path in plan.corpus]
    if not os.path.exists(plan.key_file):
        if plan.key_seed is None:
            raise FileNotFoundError(
                f"key file {plan.key_file} missing and no key_seed to create it"
            )
        material = generate_key_material(
            plan.key_seed,
            [host_id for host_id, _ in hosts],
            mode=plan.mode,
            domain=plan.domain,
        )
        write_key_file(plan.key_file, material)
    keys = read_key_file(plan.key_file)

    os.makedirs(plan.output_dir, exist_ok=True)
    marked, wa, a = build_sets(
        hosts, plan.message_bits, keys, plan.domain, plan.mode, plan.attack_specs
    )
    rates_wa = difference_rates(hosts, plan.message_bits, keys, plan.domain, plan.mode, wa)
    rates_a = difference_rates(hosts, plan.message_bits, keys, plan.domain, plan.mode, a)
    points = roc_sweep(rates_wa, rates_a, plan.thresholds)
    atomic_write_bytes(
        os.path.join(plan.output_dir, "roc.csv"), roc_csv(points).encode("utf-8")
    )

    curves = {}
    for kind, grid in plan.curve_families.items():
        rows = robustness_curve(hosts, plan.message_bits, keys, kind, grid)
        curves[kind] = rows
        atomic_write_bytes(
            os.path.join(plan.output_dir, f"curve_{kind}.csv"),
            curve_csv(rows).encode("utf-8"),
        )

    atomic_write_bytes(
        os.path.join(plan.output_dir, "manifest.txt"),
        manifest_text(plan, hosts, wa, a).encode("utf-8"),
    )
    return points, curves
