"""Experiment reports: self-describing, serializable, byte-stable.

A report embeds its config echo, seed provenance, per-cell statistics with
replica and failure counts, warnings and embedded-assertion violations.
The ``meta`` mapping (runtime, timestamp) is volatile and excluded from
equality and from ``data_lines``; everything else round-trips exactly
through JSON (floats serialize via repr).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import List, Optional

__all__ = ["ExperimentReport"]


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    seed_scheme: dict
    convention: dict
    cells: List[dict]
    truncation_bias: Optional[float] = None
    warnings: List[str] = field(default_factory=list)
    violations: List[str] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, ExperimentReport):
            return NotImplemented
        return self._stable_dict() == other._stable_dict()

    def _stable_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "config": self.config,
            "seed_scheme": self.seed_scheme,
            "convention": self.convention,
            "cells": self.cells,
            "truncation_bias": self.truncation_bias,
            "warnings": self.warnings,
            "violations": self.violations,
        }

    # ------------------------------------------------------------------
    # JSON lines: one header object, then one object per cell

    def data_lines(self) -> List[str]:
        """The byte-stable serialization (header without meta, then cells)."""
        header = {"record": "header", **self._stable_dict()}
        header.pop("cells")
        lines = [json.dumps(header, sort_keys=True)]
        for i, cell in enumerate(self.cells):
            lines.append(json.dumps({"record": "cell", "index": i, **cell},
                                    sort_keys=True))
        return lines

    def to_jsonl(self, path: str) -> None:
        lines = self.data_lines()
        lines.append(json.dumps({"record": "meta", **self.meta}, sort_keys=True))
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def from_jsonl(cls, path: str) -> "ExperimentReport":
        header = None
        cells = []
        meta: dict = {}
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                kind = obj.pop("record")
                if kind == "header":
                    header = obj
                elif kind == "cell":
                    obj.pop("index", None)
                    cells.append(obj)
                elif kind == "meta":
                    meta = obj
                else:
                    raise ValueError(f"unknown record kind {kind!r}")
        if header is None:
            raise ValueError("report file has no header record")
        return cls(cells=cells, meta=meta, **header)

    # ------------------------------------------------------------------
    # CSV: header row, one row per (cell, statistic)

    def _flat_rows(self):
        for i, cell in enumerate(self.cells):
            label = cell.get("cell", str(i))
            flat = _flatten(cell)
            for key, value in flat.items():
                if key == "cell":
                    continue
                yield i, label, key, value

    def to_csv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["cell_index", "cell", "statistic", "value"])
            for row in self._flat_rows():
                i, label, key, value = row
                writer.writerow([i, label, key, _csv_value(value)])

    def write(self, path: str, fmt: str) -> None:
        if fmt == "jsonl":
            self.to_jsonl(path)
        elif fmt == "csv":
            self.to_csv(path)
        else:
            raise ValueError(f"unknown format {fmt!r}")

    def summary(self) -> str:
        buf = io.StringIO()
        buf.write(f"experiment: {self.experiment}\n")
        for key, value in self.convention.items():
            buf.write(f"  {key}: {value}\n")
        if self.truncation_bias is not None:
            buf.write(f"  truncation_bias: {self.truncation_bias:.3e}\n")
        for cell in self.cells:
            label = cell.get("cell", "?")
            keys = [k for k in cell if k != "cell"]
            shown = ", ".join(f"{k}={_short(cell[k])}" for k in keys[:6])
            buf.write(f"  [{label}] {shown}\n")
        for w in self.warnings:
            buf.write(f"  warning: {w}\n")
        for v in self.violations:
            buf.write(f"  VIOLATION: {v}\n")
        if "runtime_s" in self.meta:
            buf.write(f"  runtime_s: {self.meta['runtime_s']:.1f}\n")
        return buf.getvalue()


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for key, value in d.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(_flatten(value, prefix=f"{name}."))
        else:
            out[name] = value
    return out


def _csv_value(value):
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return json.dumps(value)
    return value


def _short(value):
    if isinstance(value, float):
        return f"{value:.4g}"
    if isinstance(value, dict):
        return "{...}"
    if isinstance(value, list) and len(value) > 4:
        return f"[{len(value)} values]"
    return value
