"""Monte Carlo sweep harness: detection probability vs SNR, users, eavesdropper
power and antenna count, plus energy histograms with both detector thresholds.

Every sweep condition (a fully specified uplink scenario) owns a random
stream derived from the master seed and the condition coordinates, never from
the sweep it appears in. Identical conditions therefore produce identical
energies across sweeps and worker counts, and both detectors are always
scored on the same draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .dataset import default_train_grid, generate_dataset
from .dtree import TreeModel, fit
from .estimation import energy_feature
from .lrt import LrtDetector
from .seeding import derived_rng, milli, parallel_map
from .signal_model import UplinkConfig, synthesize_estimate

DEFAULT_TRIALS = 100


class ModelRequiredError(RuntimeError):
    """A sweep needs a trained tree model but none was supplied."""


class SweepPoint(NamedTuple):
    value: float
    detector: str
    pe: float
    snr_db: float
    pd: float
    trials: int


@dataclass
class SweepResult:
    """Detection/false-alarm probabilities indexed by the swept variable."""

    variable: str
    values: tuple[float, ...]
    fixed: dict
    points: list[SweepPoint] = field(default_factory=list)

    def series(self, detector: str, pe: float | None = None,
               snr_db: float | None = None) -> np.ndarray:
        """pd over the sweep values for one detector/condition combination."""
        out = []
        for value in self.values:
            matches = [p.pd for p in self.points
                       if p.detector == detector and p.value == value
                       and (pe is None or p.pe == pe)
                       and (snr_db is None or p.snr_db == snr_db)]
            if len(matches) != 1:
                raise KeyError(f"{len(matches)} points match "
                               f"(detector={detector}, value={value}, pe={pe}, snr_db={snr_db})")
            out.append(matches[0])
        return np.array(out)

    def to_csv(self, path) -> None:
        with open(Path(path), "w") as fh:
            fh.write("variable,value,detector,pe,snr_db,pd,trials\n")
            for p in self.points:
                fh.write(f"{self.variable},{p.value:.9g},{p.detector},{p.pe:.9g},"
                         f"{p.snr_db:.9g},{p.pd:.9g},{p.trials}\n")


class TreeDetector:
    """Adapter presenting a TreeModel to the sweep machinery."""

    detector_id = "dt"

    def __init__(self, model: TreeModel):
        if model is None:
            raise ModelRequiredError("a trained decision-tree model is required")
        self.model = model

    def decide(self, config: UplinkConfig, energies: np.ndarray) -> np.ndarray:
        return np.asarray(self.model.predict(config.num_users, energies))


class LrtSweepDetector:
    """LRT baseline recomputing its threshold from each condition's noise variance."""

    detector_id = "lrt"

    def __init__(self, assumed_pe: float = 1.0):
        self.assumed_pe = assumed_pe

    def decide(self, config: UplinkConfig, energies: np.ndarray) -> np.ndarray:
        detector = LrtDetector.block_noise(config.num_antennas, config.noise_variance,
                                           self.assumed_pe)
        return np.asarray(detector.detect(energies))


def _snr_key(config: UplinkConfig):
    return "inf" if config.noise_variance == 0 else milli(config.snr_db)


def condition_energies(master_seed: int, config: UplinkConfig, trials: int) -> np.ndarray:
    """Fast-path energy draws for one condition, from its derived stream."""
    rng = derived_rng(master_seed, "mc", config.num_antennas, config.num_users,
                      config.pilot_length, milli(config.eavesdropper_power),
                      _snr_key(config))
    return np.asarray(energy_feature(synthesize_estimate(config, rng, size=trials)))


def detection_probability(detector, conditions, trials: int, master_seed: int,
                          threads: int = 1) -> np.ndarray:
    """Fraction of trials flagged as attacks, per condition.

    When a condition has Pe = 0 the same number is its false-alarm
    probability.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")

    def one(config):
        energies = condition_energies(master_seed, config, trials)
        return float(np.mean(detector.decide(config, energies)))

    return np.array(parallel_map(one, list(conditions), threads))


def _run_sweep(variable, values, conditions, detectors, trials, master_seed,
               fixed, threads) -> SweepResult:
    """conditions: (value, snr_db label, config) triples, several per value allowed.

    The SNR label travels alongside the config because recovering it from the
    noise variance is not bit-exact for every grid value.
    """

    def one(item):
        value, snr_db, config = item
        energies = condition_energies(master_seed, config, trials)
        return [SweepPoint(value, det.detector_id, config.eavesdropper_power,
                           float(snr_db), float(np.mean(det.decide(config, energies))),
                           trials)
                for det in detectors]

    nested = parallel_map(one, conditions, threads)
    result = SweepResult(variable, tuple(values), dict(fixed))
    for group in nested:
        result.points.extend(group)
    return result


def _detectors(model: TreeModel, assumed_pe: float):
    return [TreeDetector(model), LrtSweepDetector(assumed_pe)]


def sweep_snr(model: TreeModel, master_seed: int, *, num_antennas: int = 256,
              num_users: int = 64, pe_values=(0.0, 1.0),
              snr_db_values=tuple(float(s) for s in range(-10, 31)),
              trials: int = DEFAULT_TRIALS, assumed_pe: float = 1.0,
              threads: int = 1) -> SweepResult:
    """Detection probability vs SNR (both detectors, each Pe condition)."""
    conditions = [(snr, snr, UplinkConfig.from_snr_db(num_antennas, num_users, snr,
                                                      eavesdropper_power=pe))
                  for snr in snr_db_values for pe in pe_values]
    return _run_sweep("snr_db", snr_db_values, conditions,
                      _detectors(model, assumed_pe), trials, master_seed,
                      {"num_antennas": num_antennas, "num_users": num_users}, threads)


def sweep_users(model: TreeModel, master_seed: int, *, num_antennas: int = 256,
                snr_db: float = 10.0, pe_values=(0.0, 1.0),
                k_values=tuple(range(4, 257, 4)), trials: int = DEFAULT_TRIALS,
                assumed_pe: float = 1.0, threads: int = 1) -> SweepResult:
    """Detection probability vs number of connected users."""
    conditions = [(float(k), snr_db, UplinkConfig.from_snr_db(num_antennas, int(k), snr_db,
                                                           eavesdropper_power=pe))
                  for k in k_values for pe in pe_values]
    return _run_sweep("num_users", tuple(float(k) for k in k_values), conditions,
                      _detectors(model, assumed_pe), trials, master_seed,
                      {"num_antennas": num_antennas, "snr_db": snr_db}, threads)


def sweep_pe(model: TreeModel, master_seed: int, *, num_antennas: int = 256,
             num_users: int = 64, snr_db_values=(0.0, 10.0),
             pe_values=tuple(round(0.1 * i, 1) for i in range(26)),
             trials: int = DEFAULT_TRIALS, assumed_pe: float = 1.0,
             threads: int = 1) -> SweepResult:
    """Detection probability vs eavesdropper power, one curve per SNR."""
    conditions = [(pe, snr, UplinkConfig.from_snr_db(num_antennas, num_users, snr,
                                                     eavesdropper_power=pe))
                  for pe in pe_values for snr in snr_db_values]
    return _run_sweep("pe", tuple(pe_values), conditions,
                      _detectors(model, assumed_pe), trials, master_seed,
                      {"num_antennas": num_antennas, "num_users": num_users}, threads)


def train_default_model(num_antennas: int, master_seed: int, max_depth: int = 1,
                        threads: int = 1) -> TreeModel:
    """Generate the default training grid for M antennas and fit a tree on it."""
    grid = default_train_grid(num_antennas, master_seed)
    return fit(generate_dataset(grid, "fast", threads), max_depth)


def sweep_antennas(master_seed: int, *, num_users: int = 64, snr_db: float = 10.0,
                   pe_values=(0.0, 0.5, 1.0), m_values=tuple(range(64, 257, 16)),
                   trials: int = DEFAULT_TRIALS, max_depth: int = 1,
                   assumed_pe: float = 1.0, threads: int = 1):
    """Detection probability vs antenna count, retraining the tree per M.

    Returns (SweepResult, {M: TreeModel}) so the per-M thresholds stay
    inspectable.
    """
    models = {int(m): train_default_model(int(m), master_seed, max_depth, threads)
              for m in m_values}
    result = SweepResult("num_antennas", tuple(float(m) for m in m_values),
                         {"num_users": num_users, "snr_db": snr_db})
    lrt = LrtSweepDetector(assumed_pe)
    for m in m_values:
        detectors = [TreeDetector(models[int(m)]), lrt]
        conditions = [(float(m), snr_db, UplinkConfig.from_snr_db(int(m), num_users, snr_db,
                                                               eavesdropper_power=pe))
                      for pe in pe_values]
        partial = _run_sweep("num_antennas", (float(m),), conditions, detectors,
                             trials, master_seed, {}, threads)
        result.points.extend(partial.points)
    return result, models


class HistogramCell(NamedTuple):
    snr_db: float
    pe: float
    label: int
    bin_edges: np.ndarray
    counts: np.ndarray
    lrt_threshold_normalized: float


@dataclass
class HistogramExport:
    """Per (SNR, Pe) histograms of the energy feature plus both thresholds."""

    cells: list[HistogramCell]
    dt_threshold: float
    trials: int
    fixed: dict

    def cell(self, snr_db: float, pe: float) -> HistogramCell:
        for c in self.cells:
            if c.snr_db == snr_db and c.pe == pe:
                return c
        raise KeyError(f"no histogram cell at snr={snr_db}, pe={pe}")

    def to_csv(self, path) -> None:
        with open(Path(path), "w") as fh:
            fh.write("snr_db,pe,label,bin_left,bin_right,count,"
                     "lrt_threshold,dt_threshold\n")
            for c in self.cells:
                for left, right, count in zip(c.bin_edges[:-1], c.bin_edges[1:], c.counts):
                    fh.write(f"{c.snr_db:.9g},{c.pe:.9g},{c.label},{left:.9g},"
                             f"{right:.9g},{count},{c.lrt_threshold_normalized:.9g},"
                             f"{self.dt_threshold:.9g}\n")


def export_energy_histograms(model: TreeModel, master_seed: int, *,
                             num_antennas: int = 256, num_users: int = 64,
                             snr_db_values=(-10.0, -5.0, 0.0, 10.0),
                             pe_values=(0.0, 0.5, 1.0), trials: int = DEFAULT_TRIALS,
                             bins: int = 40, assumed_pe: float = 1.0) -> HistogramExport:
    """Histogram the energy feature per (SNR, Pe) cell with thresholds attached.

    The tree threshold comes from the trained model's root rule and is shared
    by every cell; the LRT threshold is recomputed per SNR. Cells at the same
    SNR share bin edges so the two classes can be overlaid.
    """
    if bins < 10:
        raise ValueError("bins must be >= 10")
    dt_threshold = model.root_energy_threshold if model is not None else None
    if dt_threshold is None:
        raise ModelRequiredError("model must carry an energy rule at its root")

    cells = []
    for snr in snr_db_values:
        per_pe = {}
        for pe in pe_values:
            config = UplinkConfig.from_snr_db(num_antennas, num_users, snr,
                                              eavesdropper_power=pe)
            per_pe[pe] = condition_energies(master_seed, config, trials)
        pooled = np.concatenate(list(per_pe.values()))
        edges = np.histogram_bin_edges(pooled, bins=bins)
        sigma2 = 10.0 ** (-snr / 10.0)
        lrt_norm = LrtDetector.block_noise(num_antennas, sigma2, assumed_pe).normalized_threshold
        for pe, energies in per_pe.items():
            counts, _ = np.histogram(energies, bins=edges)
            cells.append(HistogramCell(float(snr), float(pe), int(pe > 0),
                                       edges, counts, lrt_norm))
    return HistogramExport(cells, float(dt_threshold), trials,
                           {"num_antennas": num_antennas, "num_users": num_users})


# ---------------------------------------------------------------------------
# Reproduction bands: the published behavior each figure must exhibit.
# Each checker returns a list of violations (empty = pass).
# ---------------------------------------------------------------------------

def check_fig4(result: SweepResult) -> list[str]:
    bad = []
    dt_pd = result.series("dt", pe=1.0)
    dt_fa = result.series("dt", pe=0.0)
    lrt_pd = result.series("lrt", pe=1.0)
    lrt_fa = result.series("lrt", pe=0.0)
    for snr, pd in zip(result.values, dt_pd):
        if pd < 0.99:
            bad.append(f"dt pd {pd:.3f} < 0.99 at snr {snr:g} dB, pe=1")
    for snr, fa_d, fa_l in zip(result.values, dt_fa, lrt_fa):
        if fa_d > 0.01:
            bad.append(f"dt false alarm {fa_d:.3f} > 0.01 at snr {snr:g} dB")
        if fa_l > 0.01:
            bad.append(f"lrt false alarm {fa_l:.3f} > 0.01 at snr {snr:g} dB")
    for snr, pd in zip(result.values, lrt_pd):
        if snr <= -2 and pd > 0.05:
            bad.append(f"lrt pd {pd:.3f} > 0.05 at snr {snr:g} dB")
        if snr >= 6 and pd < 0.99:
            bad.append(f"lrt pd {pd:.3f} < 0.99 at snr {snr:g} dB")
    return bad


def check_fig5(result: SweepResult) -> list[str]:
    bad = []
    for detector in ("dt", "lrt"):
        for k, pd in zip(result.values, result.series(detector, pe=1.0)):
            if pd != 1.0:
                bad.append(f"{detector} pd {pd:.3f} != 1.00 at K={k:g}, pe=1")
        for k, fa in zip(result.values, result.series(detector, pe=0.0)):
            if fa != 0.0:
                bad.append(f"{detector} false alarm {fa:.3f} != 0.00 at K={k:g}")
    return bad


def check_fig6(result: SweepResult) -> list[str]:
    bad = []
    dt0 = result.series("dt", snr_db=0.0)
    dt10 = result.series("dt", snr_db=10.0)
    lrt0 = result.series("lrt", snr_db=0.0)
    for pe, pd in zip(result.values, dt0):
        if pe >= 0.5 and pd < 0.99:
            bad.append(f"dt pd {pd:.3f} < 0.99 at pe {pe:g}, snr 0 dB")
    for pe, pd in zip(result.values, lrt0):
        if pe <= 0.8 and pd > 0.10:
            bad.append(f"lrt pd {pd:.3f} > 0.10 at pe {pe:g}, snr 0 dB")
        if pe >= 1.6 and pd < 0.99:
            bad.append(f"lrt pd {pd:.3f} < 0.99 at pe {pe:g}, snr 0 dB")
    for pe, a, b in zip(result.values, dt0, dt10):
        if abs(a - b) > 0.05:
            bad.append(f"dt pd gap |{a:.3f}-{b:.3f}| > 0.05 between snr 0/10 at pe {pe:g}")
    return bad


def check_fig7(result: SweepResult) -> list[str]:
    bad = []
    values = np.array(result.values)
    dt_05 = result.series("dt", pe=0.5)
    dt_fa = result.series("dt", pe=0.0)
    lrt_05 = result.series("lrt", pe=0.5)
    lrt_fa = result.series("lrt", pe=0.0)
    for m, pd in zip(values, dt_05):
        if m >= 160 and pd < 0.95:
            bad.append(f"dt pd {pd:.3f} < 0.95 at M={m:g}, pe=0.5")
    low, high = values < 150, values >= 150
    if low.any() and high.any() and not dt_05[low].mean() < dt_05[high].mean():
        bad.append(f"dt pd mean over M<150 ({dt_05[low].mean():.3f}) not below "
                   f"mean over M>=150 ({dt_05[high].mean():.3f})")
    for m, fa in zip(values, dt_fa):
        if m >= 80 and fa > 0.05:
            bad.append(f"dt false alarm {fa:.3f} > 0.05 at M={m:g}")
    for m, fa in zip(values, lrt_fa):
        if fa != 0.0:
            bad.append(f"lrt false alarm {fa:.3f} != 0 at M={m:g}")
    if np.sum(lrt_05 <= 0.75) < len(values) / 2:
        bad.append("lrt pd at pe=0.5 not <= 0.75 on at least half the M grid")
    return bad


def check_fig8(export: HistogramExport) -> list[str]:
    bad = []
    if not 1.15 <= export.dt_threshold <= 1.45:
        bad.append(f"dt threshold {export.dt_threshold:.4f} outside [1.15, 1.45]")
    for c in export.cells:
        if int(c.counts.sum()) != export.trials:
            bad.append(f"cell (snr={c.snr_db:g}, pe={c.pe:g}) counts sum "
                       f"{int(c.counts.sum())} != trials {export.trials}")
        if not np.all(np.diff(c.bin_edges) > 0):
            bad.append(f"cell (snr={c.snr_db:g}, pe={c.pe:g}) bin edges not increasing")
        # Sample mean must sit within 5 standard errors of 1 + Pe + sigma^2/N.
        sigma2 = 10.0 ** (-c.snr_db / 10.0)
        expected = 1.0 + c.pe + sigma2 / 300.0
        centers = (c.bin_edges[:-1] + c.bin_edges[1:]) / 2
        mean = float(np.sum(centers * c.counts) / max(1, c.counts.sum()))
        se = expected / math.sqrt(export.fixed["num_antennas"] * export.trials)
        bin_width = float(np.max(np.diff(c.bin_edges)))
        if abs(mean - expected) > 5 * se + bin_width:
            bad.append(f"cell (snr={c.snr_db:g}, pe={c.pe:g}) mean {mean:.4f} far "
                       f"from {expected:.4f}")
    return bad


def check_table3(cv_results) -> list[str]:
    bad = []
    paper = {"accuracy": 0.998, "precision": 0.997, "recall": 0.998, "f1": 0.998}
    for row in cv_results:
        for name, reference in paper.items():
            mean = getattr(row, f"{name}_mean")
            if name != "f1" and mean < 0.99:
                bad.append(f"depth {row.depth} {name} {mean:.4f} < 0.99")
            if abs(mean - reference) > 0.005:
                bad.append(f"depth {row.depth} {name} {mean:.4f} not within "
                           f"0.005 of {reference}")
    return bad


# ---------------------------------------------------------------------------
# SVG rendering
# ---------------------------------------------------------------------------

_AXIS_LABELS = {"snr_db": "SNR (dB)", "num_users": "number of users K",
                "pe": "eavesdropper power Pe", "num_antennas": "number of antennas M"}


def save_sweep_svg(result: SweepResult, path, title: str | None = None) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.5))
    styles = {"dt": "o-", "lrt": "s--"}
    if result.variable == "pe":
        # Curves are per (detector, SNR); Pe runs along the x axis.
        combos = sorted({(p.detector, p.snr_db) for p in result.points})
        curves = [(d, None, s, f"{d.upper()}, SNR={s:g} dB") for d, s in combos]
    else:
        combos = sorted({(p.detector, p.pe) for p in result.points})
        curves = [(d, pe, None, f"{d.upper()}, Pe={pe:g}") for d, pe in combos]
    for detector, pe, snr, label in curves:
        series = result.series(detector, pe=pe, snr_db=snr)
        ax.plot(result.values, series, styles.get(detector, "-"), label=label,
                markersize=4)
    ax.legend(fontsize=8)
    ax.set_xlabel(_AXIS_LABELS.get(result.variable, result.variable))
    ax.set_ylabel("detection probability")
    ax.set_ylim(-0.03, 1.05)
    ax.grid(alpha=0.3)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(Path(path), format="svg")
    plt.close(fig)


def save_histograms_svg(export: HistogramExport, path, title: str | None = None) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    snrs = sorted({c.snr_db for c in export.cells}, reverse=True)
    pes = sorted({c.pe for c in export.cells if c.pe > 0})
    rows, cols = len(snrs), max(1, len(pes))
    fig, axes = plt.subplots(rows, cols, figsize=(3.2 * cols, 2.4 * rows),
                             squeeze=False)
    for i, snr in enumerate(snrs):
        for j, pe in enumerate(pes):
            ax = axes[i][j]
            clean = export.cell(snr, 0.0) if any(c.pe == 0 and c.snr_db == snr
                                                 for c in export.cells) else None
            attacked = export.cell(snr, pe)
            if clean is not None:
                centers = (clean.bin_edges[:-1] + clean.bin_edges[1:]) / 2
                ax.bar(centers, clean.counts, width=np.diff(clean.bin_edges),
                       color="tab:blue", alpha=0.6, label="no attack")
            centers = (attacked.bin_edges[:-1] + attacked.bin_edges[1:]) / 2
            ax.bar(centers, attacked.counts, width=np.diff(attacked.bin_edges),
                   color="tab:red", alpha=0.6, label=f"attack, Pe={pe:g}")
            ax.axvline(attacked.lrt_threshold_normalized, color="black",
                       linestyle="--", linewidth=1, label="LRT threshold")
            ax.axvline(export.dt_threshold, color="tab:green", linestyle="-.",
                       linewidth=1, label="DT threshold")
            ax.set_title(f"SNR {snr:g} dB", fontsize=8)
            ax.tick_params(labelsize=7)
            if i == 0 and j == 0:
                ax.legend(fontsize=6)
    for ax in axes[-1]:
        ax.set_xlabel("energy E", fontsize=8)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(Path(path), format="svg")
    plt.close(fig)
