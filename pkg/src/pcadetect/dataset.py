"""Labeled dataset generation over (K, Pe, SNR) grids, with class balancing.

A dataset row is one simulated uplink trial reduced to the feature pair
(num_users K, energy E) plus the SNR and Pe that produced it and the binary
attack label (pca = 1 iff Pe > 0). Cells are visited K-outer / Pe / SNR-inner
with a fixed trial count per cell; afterwards the Pe = 0 cells are re-generated
with fresh randomness once per positive Pe value so the two classes end up
exactly balanced.

Each (cell, replica) pair owns a derived random stream, so generation is
reproducible for any thread count and rows always land in the same order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from hashlib import sha256
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import __version__
from .estimation import energy_feature, ls_estimate
from .seeding import derived_rng, milli, parallel_map
from .signal_model import UplinkConfig, generate_pilots, simulate_uplink, synthesize_estimate

CSV_HEADER = "k,snr_db,pe,energy,pca"
GENERATION_MODES = ("fast", "full")


class DatasetFormatError(ValueError):
    """A dataset file violates the CSV schema or a row invariant."""


class Sample(NamedTuple):
    k: int
    snr_db: float
    pe: float
    energy: float
    pca: int


@dataclass(frozen=True)
class GridSpec:
    """Parameter grid and trial budget for dataset generation."""

    snr_db_values: tuple[float, ...]
    k_values: tuple[int, ...]
    pe_values: tuple[float, ...]
    num_antennas: int
    master_seed: int
    trials_per_cell: int = 100
    pilot_length: int = 300

    def __post_init__(self):
        object.__setattr__(self, "snr_db_values", tuple(float(v) for v in self.snr_db_values))
        object.__setattr__(self, "k_values", tuple(int(v) for v in self.k_values))
        object.__setattr__(self, "pe_values", tuple(float(v) for v in self.pe_values))
        if not self.snr_db_values or not self.k_values or not self.pe_values:
            raise ValueError("grid axes must be non-empty")
        if self.trials_per_cell < 1:
            raise ValueError("trials_per_cell must be >= 1")
        if min(self.k_values) < 1:
            raise ValueError("k values must be >= 1")
        if max(self.k_values) > self.num_antennas:
            raise ValueError("k values must not exceed the antenna count")
        if max(self.k_values) > self.pilot_length:
            raise ValueError("k values must not exceed the pilot length (orthogonality)")
        if min(self.pe_values) < 0:
            raise ValueError("pe values must be >= 0")

    @property
    def positive_pe_values(self) -> tuple[float, ...]:
        return tuple(p for p in self.pe_values if p > 0)

    def expected_row_count(self) -> int:
        """Row count after balancing."""
        base = len(self.k_values) * len(self.snr_db_values) * self.trials_per_cell
        n_pos = len(self.positive_pe_values)
        n_zero_cells = len(self.pe_values) - n_pos
        zero_passes = max(1, n_pos) if n_zero_cells else 0
        return base * (n_pos + n_zero_cells * zero_passes)

    def digest(self) -> str:
        payload = {
            "snr_db_values": self.snr_db_values,
            "k_values": self.k_values,
            "pe_values": self.pe_values,
            "num_antennas": self.num_antennas,
            "master_seed": self.master_seed,
            "trials_per_cell": self.trials_per_cell,
            "pilot_length": self.pilot_length,
        }
        return sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        return {
            "snr_db_values": list(self.snr_db_values),
            "k_values": list(self.k_values),
            "pe_values": list(self.pe_values),
            "num_antennas": self.num_antennas,
            "master_seed": self.master_seed,
            "trials_per_cell": self.trials_per_cell,
            "pilot_length": self.pilot_length,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "GridSpec":
        return cls(
            snr_db_values=tuple(payload["snr_db_values"]),
            k_values=tuple(payload["k_values"]),
            pe_values=tuple(payload["pe_values"]),
            num_antennas=int(payload["num_antennas"]),
            master_seed=int(payload["master_seed"]),
            trials_per_cell=int(payload["trials_per_cell"]),
            pilot_length=int(payload["pilot_length"]),
        )


def default_train_grid(num_antennas: int, master_seed: int) -> GridSpec:
    """Training grid: SNR -10..30 dB step 5, K = {1, 16, 32, ..., M}, Pe 0..2.5 step 0.5."""
    if num_antennas < 16:
        raise ValueError("training grid needs at least 16 antennas")
    return GridSpec(
        snr_db_values=tuple(float(s) for s in range(-10, 31, 5)),
        k_values=(1,) + tuple(range(16, num_antennas + 1, 16)),
        pe_values=(0.0, 0.5, 1.0, 1.5, 2.0, 2.5),
        num_antennas=num_antennas,
        master_seed=master_seed,
    )


def default_test_grid(num_antennas: int, master_seed: int) -> GridSpec:
    """Test grid: SNR step 1 dB, K = 1..M step 1, Pe 0..2.5 step 0.1."""
    return GridSpec(
        snr_db_values=tuple(float(s) for s in range(-10, 31)),
        k_values=tuple(range(1, num_antennas + 1)),
        pe_values=tuple(round(0.1 * i, 1) for i in range(26)),
        num_antennas=num_antennas,
        master_seed=master_seed,
    )


@dataclass(eq=False)
class Dataset:
    """Column-oriented collection of labeled feature rows."""

    k: np.ndarray
    snr_db: np.ndarray
    pe: np.ndarray
    energy: np.ndarray
    pca: np.ndarray
    provenance: GridSpec | None = None
    generation_mode: str = "fast"

    def __post_init__(self):
        self.k = np.asarray(self.k, dtype=np.int64)
        self.snr_db = np.asarray(self.snr_db, dtype=float)
        self.pe = np.asarray(self.pe, dtype=float)
        self.energy = np.asarray(self.energy, dtype=float)
        self.pca = np.asarray(self.pca, dtype=np.int64)
        lengths = {len(self.k), len(self.snr_db), len(self.pe), len(self.energy), len(self.pca)}
        if len(lengths) != 1:
            raise ValueError("all columns must have the same length")
        if len(self.energy) and self.energy.min() < 0:
            raise ValueError("energy must be >= 0")
        if not np.isin(self.pca, (0, 1)).all():
            raise ValueError("pca labels must be 0 or 1")

    def __len__(self) -> int:
        return len(self.pca)

    def class_counts(self) -> tuple[int, int]:
        """(no-attack rows, attack rows)."""
        positives = int(self.pca.sum())
        return len(self) - positives, positives

    def rows(self):
        for i in range(len(self)):
            yield Sample(int(self.k[i]), float(self.snr_db[i]), float(self.pe[i]),
                         float(self.energy[i]), int(self.pca[i]))

    def select(self, mask: np.ndarray) -> "Dataset":
        return Dataset(self.k[mask], self.snr_db[mask], self.pe[mask],
                       self.energy[mask], self.pca[mask],
                       provenance=self.provenance, generation_mode=self.generation_mode)


def _cell_energies(grid: GridSpec, k: int, pe: float, snr_db: float,
                   replica: int, mode: str) -> np.ndarray:
    rng = derived_rng(grid.master_seed, "cell", grid.num_antennas, grid.pilot_length,
                      k, milli(pe), milli(snr_db), replica)
    config = UplinkConfig.from_snr_db(
        grid.num_antennas, k, snr_db,
        pilot_length=grid.pilot_length, eavesdropper_power=pe,
    )
    trials = grid.trials_per_cell
    if mode == "fast":
        estimates = synthesize_estimate(config, rng, size=trials)
        return np.asarray(energy_feature(estimates))
    pilots = generate_pilots(k, grid.pilot_length)
    attacked_pilot = pilots[config.attacked_user_index]
    energies = np.empty(trials)
    for t in range(trials):
        received, _, _ = simulate_uplink(config, pilots, rng)
        estimate = ls_estimate(received, attacked_pilot, config.attacked_user_power)
        energies[t] = energy_feature(estimate)
    return energies


def _cell_schedule(grid: GridSpec) -> list[tuple[int, float, float, int]]:
    """(k, pe, snr_db, replica) cells in output order.

    Replica 0 is the plain grid pass; replicas 1..n_pos-1 repeat the Pe = 0
    cells so the no-attack class ends up with one pass per positive Pe value.
    """
    cells = [(k, pe, snr, 0)
             for k in grid.k_values for pe in grid.pe_values for snr in grid.snr_db_values]
    has_zero = any(p == 0 for p in grid.pe_values)
    if has_zero:
        for replica in range(1, len(grid.positive_pe_values)):
            cells.extend((k, 0.0, snr, replica)
                         for k in grid.k_values for snr in grid.snr_db_values)
    return cells


def generate_dataset(grid: GridSpec, mode: str = "fast", threads: int = 1) -> Dataset:
    """Run the grid and return a balanced, labeled dataset.

    ``mode`` selects the fast distribution-equivalent path ("fast") or the
    full block simulation plus LS estimation ("full"; orders of magnitude
    slower, intended for verification and small grids).
    """
    if mode not in GENERATION_MODES:
        raise ValueError(f"mode must be one of {GENERATION_MODES}")
    cells = _cell_schedule(grid)
    energies = parallel_map(lambda c: _cell_energies(grid, *c, mode=mode), cells, threads)

    trials = grid.trials_per_cell
    total = trials * len(cells)
    k_col = np.empty(total, dtype=np.int64)
    snr_col = np.empty(total)
    pe_col = np.empty(total)
    e_col = np.empty(total)
    for i, ((k, pe, snr, _), cell_e) in enumerate(zip(cells, energies)):
        sl = slice(i * trials, (i + 1) * trials)
        k_col[sl] = k
        snr_col[sl] = snr
        pe_col[sl] = pe
        e_col[sl] = cell_e
    ds = Dataset(k_col, snr_col, pe_col, e_col, (pe_col > 0).astype(np.int64),
                 provenance=grid, generation_mode=mode)
    assert len(ds) == grid.expected_row_count()
    return ds


def _meta_path(path: Path) -> Path:
    return path.with_suffix(".meta.json")


def save_csv(dataset: Dataset, path, extra_meta: dict | None = None) -> None:
    """Write rows as CSV (floats at 9 significant digits) plus a meta sidecar."""
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for i in range(len(dataset)):
            fh.write(f"{dataset.k[i]:d},{dataset.snr_db[i]:.9g},{dataset.pe[i]:.9g},"
                     f"{dataset.energy[i]:.9g},{dataset.pca[i]:d}\n")
    zeros, ones = dataset.class_counts()
    meta = {
        "format_version": 1,
        "generator": f"pcadetect {__version__}",
        "generation_mode": dataset.generation_mode,
        "rows": len(dataset),
        "class_counts": {"no_pca": zeros, "pca": ones},
        "grid": dataset.provenance.to_dict() if dataset.provenance else None,
        "master_seed": dataset.provenance.master_seed if dataset.provenance else None,
    }
    if extra_meta:
        meta.update(extra_meta)
    with open(_meta_path(path), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_csv(path) -> Dataset:
    """Read a dataset written by save_csv, enforcing row invariants.

    A missing sidecar is tolerated (provenance comes back as None); malformed
    rows raise DatasetFormatError with the offending line number.
    """
    path = Path(path)
    k, snr, pe, energy, pca = [], [], [], [], []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise DatasetFormatError(f"{path}:1: expected header '{CSV_HEADER}', got '{header}'")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 5:
                raise DatasetFormatError(f"{path}:{lineno}: expected 5 fields, got {len(parts)}")
            try:
                k_i = int(parts[0])
                snr_i = float(parts[1])
                pe_i = float(parts[2])
                e_i = float(parts[3])
                pca_i = int(parts[4])
            except ValueError as exc:
                raise DatasetFormatError(f"{path}:{lineno}: {exc}") from exc
            if k_i < 1:
                raise DatasetFormatError(f"{path}:{lineno}: k must be >= 1")
            if e_i < 0:
                raise DatasetFormatError(f"{path}:{lineno}: energy must be >= 0")
            if pca_i not in (0, 1):
                raise DatasetFormatError(f"{path}:{lineno}: pca label must be 0 or 1")
            if pe_i < 0:
                raise DatasetFormatError(f"{path}:{lineno}: pe must be >= 0")
            k.append(k_i)
            snr.append(snr_i)
            pe.append(pe_i)
            energy.append(e_i)
            pca.append(pca_i)

    provenance = None
    mode = "unknown"
    meta_file = _meta_path(path)
    if meta_file.exists():
        with open(meta_file) as fh:
            meta = json.load(fh)
        if meta.get("grid"):
            provenance = GridSpec.from_dict(meta["grid"])
        mode = meta.get("generation_mode", "unknown")
    return Dataset(np.array(k, dtype=np.int64), np.array(snr), np.array(pe),
                   np.array(energy), np.array(pca, dtype=np.int64),
                   provenance=provenance, generation_mode=mode)


def stratified_kfold(dataset: Dataset, n_folds: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Stratified k-fold partition of the dataset's row indices.

    Returns n_folds (train_idx, val_idx) pairs. Validation folds are disjoint,
    cover every row, and match the global class proportions to within one row.
    """
    if n_folds < 2:
        raise ValueError("n_folds must be >= 2")
    labels = dataset.pca
    rng = np.random.default_rng(seed)
    fold_members: list[list[np.ndarray]] = [[] for _ in range(n_folds)]
    for cls in (0, 1):
        idx = np.flatnonzero(labels == cls)
        if len(idx) < n_folds:
            raise ValueError(f"class {cls} has {len(idx)} rows; needs >= {n_folds}")
        rng.shuffle(idx)
        base, extra = divmod(len(idx), n_folds)
        start = 0
        for fold in range(n_folds):
            size = base + (1 if fold < extra else 0)
            fold_members[fold].append(idx[start:start + size])
            start += size
    folds = []
    all_idx = np.arange(len(dataset))
    for fold in range(n_folds):
        val = np.sort(np.concatenate(fold_members[fold]))
        mask = np.ones(len(dataset), dtype=bool)
        mask[val] = False
        folds.append((all_idx[mask], val))
    return folds
