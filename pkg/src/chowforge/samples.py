"""Labeled sample sets and their on-disk format.

CSV layout: header x_1,...,x_n,y,corrupted; floats written with shortest
round-trip decimals, newline "\\n", UTF-8. The corrupted column is
simulation-only metadata; estimator entry points never read it to make
decisions (it feeds diagnostics only).
"""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


@dataclass
class LabeledSampleSet:
    X: np.ndarray
    y: np.ndarray
    corrupted: np.ndarray = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        if self.X.ndim != 2:
            raise ConfigError("X must be (N, n)")
        self.y = np.asarray(self.y)
        if self.corrupted is None:
            self.corrupted = np.zeros(len(self.y), dtype=bool)
        self.corrupted = np.asarray(self.corrupted, dtype=bool)
        if self.y.shape != (self.X.shape[0],) or self.corrupted.shape != self.y.shape:
            raise ConfigError("X, y, corrupted lengths disagree")
        if not np.all(np.abs(self.y) == 1):
            raise ConfigError("labels must be in {-1, +1}")
        self.y = self.y.astype(np.int8)

    @property
    def n(self):
        return self.X.shape[1]

    def __len__(self):
        return self.X.shape[0]

    def subset(self, idx):
        return LabeledSampleSet(self.X[idx], self.y[idx], self.corrupted[idx])

    def save_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([f"x_{i+1}" for i in range(self.n)] + ["y", "corrupted"])
            for row, lab, bad in zip(self.X, self.y, self.corrupted):
                w.writerow([repr(float(v)) for v in row] + [int(lab), int(bad)])

    @classmethod
    def load_csv(cls, path):
        with open(path, newline="", encoding="utf-8") as fh:
            r = csv.reader(fh)
            header = next(r)
            if header[-2:] != ["y", "corrupted"]:
                raise ConfigError(f"unexpected sample CSV header in {path}")
            n = len(header) - 2
            X, y, bad = [], [], []
            for row in r:
                X.append([float(v) for v in row[:n]])
                y.append(int(row[n]))
                bad.append(bool(int(row[n + 1])))
        return cls(np.array(X, dtype=float).reshape(-1, n), np.array(y), np.array(bad))


def save_meta(path, n, d, K, eta, strategy, seed, N):
    meta = {"n": n, "d": d, "K": K, "eta": eta, "strategy": strategy,
            "seed": seed, "N": N}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_meta(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
