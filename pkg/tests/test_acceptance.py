"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Everything in this module runs from the fixed master seed in conftest
(ACCEPT_SEED), so each criterion is a single deterministic, replayable
experiment. Run with `pytest tests/test_acceptance.py -v -s` to see the
per-criterion lines.
"""

import time

import numpy as np

from conftest import ACCEPT_SEED
from oracles import exhaustive_split_oracle
from pcadetect.dataset import Dataset, GridSpec, generate_dataset
from pcadetect.dtree import (FEATURE_ENERGY, Split, fit, gini, grid_search_cv)
from pcadetect.experiments import (check_fig4, check_fig5, check_fig6, check_fig7,
                                   check_table3, sweep_antennas, sweep_pe,
                                   sweep_snr, sweep_users)
from pcadetect.lrt import lrt_threshold, lrt_threshold_unsimplified
from pcadetect.signal_model import UplinkConfig, synthesize_estimate


def report(name: str, violations: list):
    print(f"\nACCEPTANCE {name}: {'PASS' if not violations else 'FAIL'}")
    for v in violations:
        print(f"  - {v}")
    assert not violations, f"{name}: {violations}"


def test_criterion_1_threshold_algebra_identity():
    """Simplified and pre-simplification thresholds agree to 1e-12 over
    10^4 random parameter draws, in under a second."""
    rng = np.random.default_rng(ACCEPT_SEED)
    n = 10_000
    antennas = rng.integers(1, 513, n)
    pilot_len = rng.integers(1, 1001, n)
    sigma2 = rng.uniform(0.0, 20.0, n)
    pe = rng.uniform(0.0, 5.0, n)
    pe[pe == 0] = 5.0

    start = time.perf_counter()
    simplified = lrt_threshold(antennas, pilot_len, sigma2, pe)
    unsimplified = lrt_threshold_unsimplified(antennas, pilot_len, sigma2, pe)
    elapsed = time.perf_counter() - start

    worst = float(np.max(np.abs(simplified - unsimplified) / np.abs(simplified)))
    violations = []
    if worst > 1e-12:
        violations.append(f"max relative gap {worst:.3e} > 1e-12")
    if elapsed >= 1.0:
        violations.append(f"runtime {elapsed:.2f}s >= 1s")
    print(f"\n  identity max relative gap {worst:.3e} over {n} draws in {elapsed*1e3:.0f} ms")
    report("criterion 1 (threshold algebra identity)", violations)


def test_criterion_2_variance_oracles_and_fast_path():
    """Per-entry estimate variances match 1 + sigma^2/N and 1 + Pe + sigma^2/N
    within 2% over 1e5 draws, and the fast path matches the full
    simulate-then-estimate pipeline in mean and variance of E within 3
    standard errors over 1e4 paired draws at M=64. Runtime < 1 min."""
    start = time.perf_counter()
    violations = []

    # Per-entry variances over 1e5 fast-path draws (M=32 antennas per draw).
    for sigma2, pe in ((0.1, 0.0), (0.1, 1.0), (30.0, 0.0), (30.0, 1.0)):
        config = UplinkConfig(32, 1, sigma2, pilot_length=300, eavesdropper_power=pe)
        rng = np.random.default_rng(ACCEPT_SEED + 17)
        draws = synthesize_estimate(config, rng, size=100_000)
        measured = float(np.mean(np.abs(draws) ** 2))
        expected = 1.0 + pe + sigma2 / 300.0
        if abs(measured - expected) / expected > 0.02:
            violations.append(f"variance {measured:.5f} vs {expected:.5f} "
                              f"(sigma2={sigma2}, pe={pe}) off by >2%")

    # Fast path vs full simulation, 1e4 paired draws per condition.
    snr_for = {0.1: 10.0, 1.0: 0.0}
    for sigma2 in (0.1, 1.0):
        for pe in (0.0, 1.0):
            grid = GridSpec(snr_db_values=(snr_for[sigma2],), k_values=(8,),
                            pe_values=(pe,), num_antennas=64,
                            master_seed=ACCEPT_SEED, trials_per_cell=10_000,
                            pilot_length=300)
            fast = generate_dataset(grid, "fast").energy
            full = generate_dataset(grid, "full").energy
            n = len(fast)
            se_mean = np.sqrt(fast.var() / n + full.var() / n)
            if abs(fast.mean() - full.mean()) > 3 * se_mean:
                violations.append(f"mean gap {abs(fast.mean()-full.mean()):.4f} > "
                                  f"3 SE at (sigma2={sigma2}, pe={pe})")
            se_var = np.sqrt((np.var((fast - fast.mean()) ** 2)
                              + np.var((full - full.mean()) ** 2)) / n)
            if abs(fast.var() - full.var()) > 3 * se_var:
                violations.append(f"variance gap at (sigma2={sigma2}, pe={pe}) > 3 SE")

    elapsed = time.perf_counter() - start
    if elapsed >= 60.0:
        violations.append(f"runtime {elapsed:.1f}s >= 60s")
    print(f"\n  variance oracles + paired fast/full checks in {elapsed:.1f}s")
    report("criterion 2 (variance oracles, fast path equivalence)", violations)


def test_criterion_3_snr_sweep_reproduction(paper_model):
    """SNR sweep at M=256, K=64, 100 trials/point: tree detects at every SNR,
    false alarms below 1%, LRT blind below -2 dB and sharp above 6 dB.
    Runtime of the sweep <= 2 min on the fast path."""
    start = time.perf_counter()
    result = sweep_snr(paper_model, ACCEPT_SEED, trials=100)
    elapsed = time.perf_counter() - start
    violations = check_fig4(result)
    if elapsed > 120.0:
        violations.append(f"sweep runtime {elapsed:.1f}s > 120s")
    print(f"\n  41-point SNR sweep in {elapsed:.1f}s")
    report("criterion 3 (detection vs SNR reproduction)", violations)


def test_criterion_4_cross_validation_table(paper_training_set):
    """Stratified 10-fold CV on the regenerated default training grid:
    every depth 1..5 lands on the published 0.998/0.997/0.998 metric levels
    (within 0.005, and at least 0.99). Runtime <= 10 min."""
    start = time.perf_counter()
    results = grid_search_cv(paper_training_set, range(1, 6), 10, ACCEPT_SEED)
    elapsed = time.perf_counter() - start
    violations = check_table3(results)
    if elapsed > 600.0:
        violations.append(f"cross-validation runtime {elapsed:.1f}s > 600s")
    for row in results:
        print(f"\n  depth {row.depth}: acc {row.accuracy_mean:.4f}+/-{row.accuracy_std:.4f} "
              f"prec {row.precision_mean:.4f} rec {row.recall_mean:.4f} "
              f"f1 {row.f1_mean:.4f}", end="")
    print(f"\n  cross-validation in {elapsed:.1f}s")
    report("criterion 4 (cross-validation metric table)", violations)


def test_criterion_5_eavesdropper_power_sweep(paper_model):
    """Eavesdropper-power sweep at SNR 0 and 10 dB (M=256, K=64).

    The criterion's trial count is unstated; 2000 trials/point makes every
    band verdict statistically stable. KNOWN RED: the band demanding LRT
    pd >= 0.99 for Pe >= 1.6 at SNR 0 dB is unattainable for the baseline
    that reproduces every other published curve, whose true detection
    probabilities are ~0.85/0.95/0.98 at Pe = 1.6/1.7/1.8 (it crosses 0.99
    only near Pe = 1.9). See the decisions ledger for the analysis.
    """
    result = sweep_pe(paper_model, ACCEPT_SEED, trials=2000)
    lrt_curve = result.series("lrt", snr_db=0.0)
    shown = {pe: pd for pe, pd in zip(result.values, lrt_curve) if 1.5 <= pe <= 2.0}
    print(f"\n  LRT pd at SNR 0 dB around the transition: "
          + ", ".join(f"Pe={pe:g}: {pd:.3f}" for pe, pd in shown.items()))
    report("criterion 5 (detection vs eavesdropper power)", check_fig6(result))


def test_criterion_6_antenna_sweep_with_retraining():
    """Antenna sweep with per-M retraining (K=64, SNR 10 dB, 100 trials):
    tree holds pd >= 0.95 for M >= 160 and degrades below M ~ 150, its false
    alarms stay under 5% for M >= 80, the LRT never false-alarms and stays
    below pd 0.75 on at least half the grid at Pe = 0.5."""
    start = time.perf_counter()
    result, models = sweep_antennas(ACCEPT_SEED, trials=100, threads=2)
    elapsed = time.perf_counter() - start
    thresholds = {m: models[m].root_energy_threshold for m in sorted(models)}
    print(f"\n  retrained thresholds: "
          + ", ".join(f"M={m}: {t:.3f}" for m, t in thresholds.items()))
    print(f"  13-point antenna sweep with retraining in {elapsed:.1f}s")
    report("criterion 6 (antenna sweep with retraining)", check_fig7(result))


def test_criterion_7_depth1_threshold_location(paper_model):
    """The trained depth-1 tree splits on energy with a threshold inside
    [1.15, 1.45], bracketing the published 1.289 under per-antenna
    normalization."""
    violations = []
    if not isinstance(paper_model.root, Split):
        violations.append("depth-1 model has no split at the root")
    elif paper_model.root.feature != FEATURE_ENERGY:
        violations.append(f"root splits on {paper_model.root.feature}, not energy")
    else:
        threshold = paper_model.root.threshold
        print(f"\n  trained depth-1 energy threshold: {threshold:.6f}")
        if not 1.15 <= threshold <= 1.45:
            violations.append(f"threshold {threshold:.4f} outside [1.15, 1.45]")
    report("criterion 7 (depth-1 threshold location)", violations)


def test_criterion_8_split_search_oracle():
    """fit(max_depth=1) equals an independent exhaustive midpoint-scan oracle
    on 100 random datasets of <= 500 rows (exact threshold match), in
    under 10 seconds."""
    rng = np.random.default_rng(ACCEPT_SEED + 8)
    start = time.perf_counter()
    violations = []
    for case in range(100):
        n = int(rng.integers(5, 501))
        labels = rng.integers(0, 2, n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        energy = np.abs(rng.normal(1.0 + 0.7 * labels, 0.6, n))
        if case % 4 == 0:
            energy = np.round(energy, 1)  # duplicated values, exact ties
        k = rng.integers(1, 9, n)
        ds = Dataset(k, np.zeros(n), labels.astype(float), energy, labels)
        model = fit(ds, 1)

        candidates = {"energy": exhaustive_split_oracle(energy, labels),
                      "num_users": exhaustive_split_oracle(k.astype(float), labels)}
        viable = {f: c for f, c in candidates.items() if c is not None}
        counts = (int(np.sum(labels == 0)), int(np.sum(labels == 1)))
        expect_leaf = (not viable
                       or min(c.impurity for c in viable.values()) >= gini(counts))
        if expect_leaf:
            if isinstance(model.root, Split):
                violations.append(f"case {case}: split where oracle finds no gain")
            continue
        best_feature = min(viable, key=lambda f: (viable[f].impurity, f != "energy"))
        if not isinstance(model.root, Split):
            violations.append(f"case {case}: leaf where oracle splits")
        elif (model.root.feature != best_feature
              or model.root.threshold != viable[best_feature].threshold):
            violations.append(
                f"case {case}: got ({model.root.feature}, {model.root.threshold}) "
                f"want ({best_feature}, {viable[best_feature].threshold})")
    elapsed = time.perf_counter() - start
    if elapsed >= 10.0:
        violations.append(f"runtime {elapsed:.1f}s >= 10s")
    print(f"\n  100 oracle comparisons in {elapsed:.1f}s")
    report("criterion 8 (split-search oracle equivalence)", violations)


def test_criterion_9_user_sweep_exact_probabilities(paper_model):
    """Both detectors read pd = 1.00 under attack and 0.00 without one for
    every K in 4..256 step 4 at SNR 10 dB with 100 trials per point."""
    result = sweep_users(paper_model, ACCEPT_SEED, trials=100)
    report("criterion 9 (user sweep, exact hit/quiet rates)", check_fig5(result))
