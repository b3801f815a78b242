"""End-to-end acceptance suite.

Each test prints one PASS/FAIL line (visible under ``pytest -s``) and
asserts the same condition.  The corpus is the ten synthetic 512x512
fixtures; keys are drawn per host from the session key material.
"""

import itertools
import time

import numpy as np
import pytest

from chaosmark.attacks import AttackSpec, apply_attack, parse_attack_spec, psnr
from chaosmark.boolnet import BooleanMap, bits_from_deci, deci, random_truth_table
from chaosmark.chain import (
    build_iteration_graph,
    convergence_q,
    empirical_uniformity,
    is_doubly_stochastic,
    is_strongly_connected,
    markov_matrix,
    point_mass,
)
from chaosmark.evaluation import roc_sweep
from chaosmark.netpbm import save_pgm
from chaosmark.scheme import EmbedConfig, detect, expected_mark, extract_lscs
from chaosmark.strategies import cids_source, generate_key_material, uniform_source, write_key_file

CHI2_Q999_DOF15 = 37.697  # 0.999 quantile of chi-square with 15 dof

VARIANTS = [(d, m) for d in ("spatial", "dwt", "dct") for m in ("fqq", "neg")]
BENCH_VARIANTS = [(d, m) for d in ("dwt", "dct") for m in ("fqq", "neg")]

ATTACK_GRIDS = {
    "crop": (1, 9, 25, 36),
    "jpeg": (90, 70, 50),
    "j2k": (1, 16, 24),
    "rot": (2, 5, 10),
}

ROC_ATTACKS = [
    "crop:1", "crop:9", "crop:25", "crop:36",
    "jpeg:90", "jpeg:70",
    "j2k:1", "j2k:2", "j2k:4", "j2k:8",
    "rot:2", "rot:5",
    "contrast:0.9", "contrast:1.1",
    "sharpen:0.5",
]


def report(ok, label):
    print(f"\n[{'PASS' if ok else 'FAIL'}] {label}")
    assert ok, label


def make_config(key_material, domain, mode, host_id):
    return EmbedConfig(
        domain=domain,
        mode=mode,
        key=key_material.key_for(host_id),
        alpha=key_material.alpha,
        precision=key_material.precision,
    )


@pytest.fixture(scope="module")
def embedded_all(corpus, message_bits, key_material):
    """Marked copy and expected mark per (domain, mode, host)."""
    out = {}
    for domain, mode in VARIANTS:
        entries = []
        for host_id, host in corpus:
            config = make_config(key_material, domain, mode, host_id)
            mark = expected_mark(host, message_bits, config)
            marked = config.codec().embed_lsc_bits(host, mark)
            entries.append((host_id, host, marked, mark, config))
        out[(domain, mode)] = entries
    return out


@pytest.fixture(scope="module")
def attack_rates(embedded_all):
    """Mean carrier difference rate per (family, param, variant)."""
    rates = {}
    for kind, grid in ATTACK_GRIDS.items():
        for param in grid:
            spec = AttackSpec(kind, float(param))
            for variant in BENCH_VARIANTS:
                values = []
                for _, _, marked, mark, config in embedded_all[variant]:
                    attacked = apply_attack(marked, spec)
                    observed = extract_lscs(attacked, config)
                    values.append(
                        100.0 * np.count_nonzero(observed != mark) / mark.size
                    )
                rates[(kind, param, variant)] = float(np.mean(values))
    return rates


def test_criterion_1_fqq_structural_theorem():
    start = time.time()
    for l in range(1, 11):
        f = BooleanMap.fqq(l)
        graph = build_iteration_graph(f)
        matrix = markov_matrix(f)
        assert is_strongly_connected(graph), f"fqq l={l} not strongly connected"
        assert is_doubly_stochastic(matrix, tol=0.0), f"fqq l={l} not doubly stochastic"
    elapsed = time.time() - start
    report(
        elapsed <= 60.0,
        f"criterion 1: fqq l=1..10 strongly connected + doubly stochastic, exact ({elapsed:.1f}s)",
    )


def test_criterion_2_convergence_to_uniform():
    start = time.time()
    worst_q = 0
    for l in range(2, 9):
        matrix = markov_matrix(BooleanMap.fqq(l))
        for state in range(1 << l):
            result = convergence_q(matrix, point_mass(l, state), eps=1e-4, cap=100000)
            assert result is not None, f"no convergence for l={l} start={state}"
            q, gap = result
            assert gap < 1e-4
            worst_q = max(worst_q, q)
    elapsed = time.time() - start
    report(
        elapsed <= 120.0,
        f"criterion 2: fqq l=2..8 converges from every point mass, max q={worst_q} ({elapsed:.1f}s)",
    )


def test_criterion_3_small_instance_oracle_equivalence():
    rng = np.random.default_rng(13)

    def brute(f):
        succ = {}
        counts = {}
        for value in range(1 << f.n):
            x = bits_from_deci(value, f.n)
            outs = []
            for k in range(1, f.n + 1):
                y = list(x)
                y[k - 1] = f.component(k, x)
                outs.append(deci(tuple(y)))
            succ[value] = outs
            for y in outs:
                counts[(value, y)] = counts.get((value, y), 0) + 1
        return succ, counts

    maps = [BooleanMap.negation(n) for n in range(1, 9)]
    maps += [BooleanMap.fqq(n) for n in range(1, 9)]
    sizes = itertools.cycle((2, 3, 4, 5))
    maps += [BooleanMap.from_table(random_truth_table(rng, next(sizes))) for _ in range(20)]
    checked = 0
    for f in maps:
        graph = build_iteration_graph(f)
        matrix = markov_matrix(f)
        succ, counts = brute(f)
        dense = matrix.counts.toarray()
        for value in range(1 << f.n):
            assert sorted(graph.succ[value].tolist()) == sorted(succ[value])
        assert dense.sum() == f.n * (1 << f.n)
        for (x, y), c in counts.items():
            assert dense[x, y] == c
        assert np.all(dense >= 0)
        checked += 1
    report(
        True,
        f"criterion 3: graph and matrix match brute-force enumeration on {checked} maps, zero discrepancies",
    )


def test_criterion_4_stego_security_empirical():
    f = BooleanMap.negation(4)
    hist, chi2 = empirical_uniformity(
        f, uniform_source(64), q=64, trials=51200, seed=20240401
    )
    assert hist.sum() == 51200
    uniform_ok = chi2 < CHI2_Q999_DOF15
    hist_cids, _ = empirical_uniformity(f, cids_source(), q=5, trials=1600, seed=7)
    cids_ok = hist_cids[(1 << 4) - 1] == 0
    report(
        uniform_ok and cids_ok,
        f"criterion 4: uniform-strategy chi2={chi2:.2f} < {CHI2_Q999_DOF15}; "
        f"content-dependent strategy never reaches all-ones (exact)",
    )


def test_criterion_5_no_attack_completeness(embedded_all, corpus, message_bits, key_material):
    worst = 0.0
    for variant in VARIANTS:
        for host_id, host, marked, mark, config in embedded_all[variant]:
            observed = extract_lscs(marked, config)
            rate = 100.0 * np.count_nonzero(observed != mark) / mark.size
            worst = max(worst, rate)
            assert rate == 0.0, f"{variant} {host_id}: rate {rate}"
    # exercise the public detect() path end to end on one host per variant
    for domain, mode in VARIANTS:
        host_id, host, marked, _, config = embedded_all[(domain, mode)][0]
        result = detect(host, message_bits, marked, config, threshold=1.0)
        assert result.difference_rate == 0.0 and result.watermarked
    report(
        worst == 0.0,
        "criterion 5: embed -> detect difference rate exactly 0 on all hosts x "
        "{spatial,dwt,dct} x {fqq,neg}",
    )


def test_criterion_6_unrelated_image_rate(corpus, message_bits, key_material):
    host_id, host = corpus[0]
    config = make_config(key_material, "dwt", "fqq", host_id)
    mark = expected_mark(host, message_bits, config)
    rng = np.random.default_rng(321)
    rates = []
    for _ in range(50):
        unrelated = rng.integers(0, 256, size=host.shape).astype(np.uint8)
        observed = extract_lscs(unrelated, config)
        rates.append(100.0 * np.count_nonzero(observed != mark) / mark.size)
    mean_rate = float(np.mean(rates))
    report(
        45.0 <= mean_rate <= 55.0,
        f"criterion 6: mean difference rate on 50 unmarked images = {mean_rate:.2f}% in [45, 55]",
    )


def test_criterion_7_fidelity(embedded_all):
    means = {}
    for domain in ("dwt", "dct"):
        values = []
        for mode in ("fqq", "neg"):
            for _, host, marked, _, _ in embedded_all[(domain, mode)]:
                values.append(psnr(host, marked))
        means[domain] = float(np.mean(values))
    ok = means["dwt"] >= 38.0 and means["dct"] >= 47.0
    report(
        ok,
        f"criterion 7: mean PSNR dwt={means['dwt']:.2f} dB (>= 38), dct={means['dct']:.2f} dB (>= 47)",
    )


def test_criterion_8a_cropping_keeps_detection(attack_rates):
    worst = max(
        attack_rates[("crop", p, v)] for p in ATTACK_GRIDS["crop"] for v in BENCH_VARIANTS
    )
    report(
        worst < 50.0,
        f"criterion 8a: cropping <= 36% keeps all variants below the 50% random error (max {worst:.2f}%)",
    )


def _pooled(attack_rates, kind, param, domain):
    return np.mean([attack_rates[(kind, param, (domain, m))] for m in ("fqq", "neg")])


def test_criterion_8b_jpeg_favors_dct(attack_rates):
    gaps = []
    for q in ATTACK_GRIDS["jpeg"]:
        dct_rate = _pooled(attack_rates, "jpeg", q, "dct")
        dwt_rate = _pooled(attack_rates, "jpeg", q, "dwt")
        gaps.append((q, dct_rate, dwt_rate))
        assert dct_rate <= dwt_rate, f"jpeg q={q}: dct {dct_rate:.2f} > dwt {dwt_rate:.2f}"
    summary = ", ".join(f"q{q}: dct {a:.1f} <= dwt {b:.1f}" for q, a, b in gaps)
    report(True, f"criterion 8b: block-DCT embedding resists JPEG better ({summary})")


def test_criterion_8c_wavelet_compression_favors_dwt(attack_rates):
    gaps = []
    for r in ATTACK_GRIDS["j2k"]:
        dwt_rate = _pooled(attack_rates, "j2k", r, "dwt")
        dct_rate = _pooled(attack_rates, "j2k", r, "dct")
        gaps.append((r, dwt_rate, dct_rate))
        assert dwt_rate <= dct_rate, f"j2k r={r}: dwt {dwt_rate:.2f} > dct {dct_rate:.2f}"
    summary = ", ".join(f"r{r}: dwt {a:.1f} <= dct {b:.1f}" for r, a, b in gaps)
    report(True, f"criterion 8c: wavelet embedding resists wavelet compression better ({summary})")


def test_criterion_8d_rotation_favors_dct(attack_rates):
    gaps = []
    for theta in ATTACK_GRIDS["rot"]:
        dct_rate = _pooled(attack_rates, "rot", theta, "dct")
        dwt_rate = _pooled(attack_rates, "rot", theta, "dwt")
        gaps.append((theta, dct_rate, dwt_rate))
        assert dct_rate <= dwt_rate, f"rot {theta}: dct {dct_rate:.2f} > dwt {dwt_rate:.2f}"
    summary = ", ".join(f"t{t}: dct {a:.1f} <= dwt {b:.1f}" for t, a, b in gaps)
    report(True, f"criterion 8d: rotation favors the block-DCT embedding ({summary})")


def test_criterion_9_roc_sanity(embedded_all, corpus, message_bits, key_material):
    specs = [parse_attack_spec(s) for s in ROC_ATTACKS]
    host_by_id = dict(corpus)
    rates_wa = []
    rates_a = []
    for host_id, host, marked, mark, config in embedded_all[("dwt", "fqq")]:
        for spec in specs:
            attacked = apply_attack(marked, spec)
            observed = extract_lscs(attacked, config)
            rates_wa.append(100.0 * np.count_nonzero(observed != mark) / mark.size)
            attacked_raw = apply_attack(host_by_id[host_id], spec)
            observed = extract_lscs(attacked_raw, config)
            rates_a.append(100.0 * np.count_nonzero(observed != mark) / mark.size)
    points = roc_sweep(np.array(rates_wa), np.array(rates_a), list(range(0, 56)))
    for prev, cur in zip(points, points[1:]):
        assert cur.tpr >= prev.tpr and cur.fpr >= prev.fpr, "ROC not monotone"
    best = max(
        (p for p in points if 40.0 <= p.threshold <= 50.0), key=lambda p: p.tpr - p.fpr
    )
    ok = best.tpr - best.fpr >= 0.5
    report(
        ok,
        f"criterion 9: ROC monotone over t=0..55; threshold {best.threshold:g} reaches "
        f"TPR-FPR = {best.tpr - best.fpr:.3f} (>= 0.5) with {len(specs)} attacks/image",
    )


def test_criterion_10_bench_determinism(tmp_path, corpus):
    from chaosmark.evaluation import load_plan, run_plan

    hosts_dir = tmp_path / "hosts"
    hosts_dir.mkdir()
    ids = []
    for host_id, host in corpus[:3]:
        save_pgm(hosts_dir / f"{host_id}.pgm", host)
        ids.append(host_id)
    write_key_file(
        tmp_path / "keys.txt", generate_key_material(777, ids, mode="fqq", domain="dct")
    )
    (tmp_path / "message.txt").write_text("110100111010" * 16)
    (tmp_path / "plan.ini").write_text(
        "\n".join(
            [
                "[corpus]",
                "dir = hosts",
                "[embed]",
                "domain = dct",
                "mode = fqq",
                "key_file = keys.txt",
                "message = message.txt",
                "[attacks]",
                "specs = crop:9 jpeg:70 rot:2",
                "[roc]",
                "thresholds = 0..55",
                "[curves]",
                "crop = 1,25",
                "[output]",
                "dir = results",
            ]
        )
    )
    plan = load_plan(tmp_path / "plan.ini")
    run_plan(plan)
    names = ("roc.csv", "curve_crop.csv", "manifest.txt")
    first = {n: (tmp_path / "results" / n).read_bytes() for n in names}
    run_plan(load_plan(tmp_path / "plan.ini"))
    identical = all((tmp_path / "results" / n).read_bytes() == first[n] for n in names)
    report(identical, "criterion 10: repeated bench runs produce byte-identical CSV outputs")
