"""Time series of scalar diagnostics with CSV + JSON persistence.

CSV layout (version 1, fixed order): one header row, then one row per
sample. Quantities not applicable to the model are written as empty
cells and come back as None. Floats use repr-precision %.17g so that
identical runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

SERIES_FORMAT_VERSION = 1

COLUMNS = (
    "t",
    "alpha_k",
    "gamma_p",
    "delta_p",
    "lambda_p",
    "alpha_kp",
    "dk_v_l2",
    "v_lp",
    "dk_theta_lp",
    "grad_v_linf",
    "omega_linf",
    "alpha_linf",
    "X",
)


@dataclass
class DiagnosticSample:
    t: float
    alpha_k: float | None = None
    gamma_p: float | None = None
    delta_p: float | None = None
    lambda_p: float | None = None
    alpha_kp: float | None = None
    dk_v_l2: float | None = None
    v_lp: float | None = None
    dk_theta_lp: float | None = None
    grad_v_linf: float | None = None
    omega_linf: float | None = None
    alpha_linf: float | None = None
    X: float | None = None


@dataclass(frozen=True)
class SeriesParams:
    """Diagnostic parameters, uniform across one series."""

    k: int = 3
    p: float = 2.0
    N: int = 2


@dataclass
class DiagnosticSeries:
    model: str
    params: SeriesParams
    nu: float = 0.0
    grid_n: int | None = None
    samples: list[DiagnosticSample] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def append(self, sample: DiagnosticSample) -> None:
        if self.samples and sample.t <= self.samples[-1].t:
            raise ValueError("sample times must be strictly increasing")
        self.samples.append(sample)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def t(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def column(self, name: str) -> np.ndarray:
        """Column as float array; absent entries become NaN."""
        if name not in COLUMNS:
            raise KeyError(f"unknown column {name!r}")
        vals = [getattr(s, name) for s in self.samples]
        return np.array([np.nan if v is None else v for v in vals])

    def has_column(self, name: str) -> bool:
        return bool(self.samples) and all(
            getattr(s, name) is not None for s in self.samples
        )

    # ------------------------------------------------------------------
    # persistence

    def write(self, stem) -> tuple[Path, Path]:
        """Write <stem>.csv and <stem>.json; returns both paths."""
        stem = Path(stem)
        csv_path = stem.with_suffix(".csv")
        json_path = stem.with_suffix(".json")
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(COLUMNS)
            for s in self.samples:
                row = []
                for name in COLUMNS:
                    v = getattr(s, name)
                    row.append("" if v is None else f"{float(v):.17g}")
                writer.writerow(row)
        sidecar = {
            "format_version": SERIES_FORMAT_VERSION,
            "model": self.model,
            "params": asdict(self.params),
            "nu": self.nu,
            "grid_n": self.grid_n,
            "columns": list(COLUMNS),
            "meta": self.meta,
        }
        with open(json_path, "w") as fh:
            json.dump(sidecar, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return csv_path, json_path

    @classmethod
    def read(cls, stem) -> "DiagnosticSeries":
        """Read a series written by write(); accepts the stem or csv path."""
        stem = Path(stem)
        if stem.suffix == ".csv":
            stem = stem.with_suffix("")
        csv_path = stem.with_suffix(".csv")
        json_path = stem.with_suffix(".json")
        with open(json_path) as fh:
            sidecar = json.load(fh)
        params = SeriesParams(**sidecar["params"])
        series = cls(
            model=sidecar["model"],
            params=params,
            nu=sidecar.get("nu", 0.0),
            grid_n=sidecar.get("grid_n"),
            meta=sidecar.get("meta", {}),
        )
        with open(csv_path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if tuple(header) != COLUMNS:
                raise ValueError(f"unexpected CSV header in {csv_path}")
            for row in reader:
                kwargs = {
                    name: (None if cell == "" else float(cell))
                    for name, cell in zip(COLUMNS, row)
                }
                series.append(DiagnosticSample(**kwargs))
        return series
