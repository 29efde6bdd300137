"""Readers for the simulator's public CSV interfaces.

Records files carry `# key=value` comment lines (schema, scenario, seed,
policy) above a plain CSV header. This module knows only those documented
layouts, nothing about how the files were produced.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import NoDataError, SchemaError

RECORDS_COLUMNS = ("t_s", "policy", "gamma_th_db", "k_ue", "k_bs", "snr_db",
                   "margin_db", "n_beams", "T_b_s", "outage")
COMPARISON_COLUMNS = ("policy", "speed_deg_s", "quantile", "gamma_th_db",
                      "outage_pct", "mean_tb_s", "mean_n_beams")


@dataclass
class RecordsTable:
    path: str
    meta: dict[str, str] = field(default_factory=dict)
    t_s: np.ndarray = None
    policy: list[str] = None
    gamma_th_db: np.ndarray = None
    snr_db: np.ndarray = None
    margin_db: np.ndarray = None
    n_beams: np.ndarray = None
    tb_s: np.ndarray = None
    outage: np.ndarray = None

    @property
    def label(self) -> str:
        scen = self.meta.get("scenario", self.path)
        pol = self.meta.get("policy", self.policy[0] if self.policy else "?")
        return f"{scen}/{pol}"

    def caption(self) -> str:
        scen = self.meta.get("scenario", "?")
        seed = self.meta.get("seed", "?")
        return f"scenario={scen} seed={seed}"


def _split_comments(path: str) -> tuple[dict[str, str], list[str]]:
    meta: dict[str, str] = {}
    body: list[str] = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                for token in line.lstrip("#").split():
                    if "=" in token:
                        k, v = token.split("=", 1)
                        meta[k] = v
            elif line.strip():
                body.append(line)
    return meta, body


def _require(header: list[str], needed, path: str) -> None:
    for col in needed:
        if col not in header:
            raise SchemaError(f"{path}: missing column {col!r}")


def read_records(path: str) -> RecordsTable:
    meta, body = _split_comments(path)
    if not body:
        raise NoDataError(f"{path}: no rows")
    rows = list(csv.reader(body))
    header = rows[0]
    _require(header, RECORDS_COLUMNS, path)
    idx = {c: header.index(c) for c in RECORDS_COLUMNS}
    data = rows[1:]
    if not data:
        raise NoDataError(f"{path}: header only, no records")

    def col(name, cast=float):
        try:
            return np.array([cast(r[idx[name]]) for r in data])
        except (ValueError, IndexError) as exc:
            raise SchemaError(f"{path}: bad value in column {name!r}: {exc}")

    return RecordsTable(
        path=path, meta=meta,
        t_s=col("t_s"),
        policy=[r[idx["policy"]] for r in data],
        gamma_th_db=col("gamma_th_db"),
        snr_db=col("snr_db"),
        margin_db=col("margin_db"),
        n_beams=col("n_beams", int),
        tb_s=col("T_b_s"),
        outage=col("outage", lambda v: bool(int(v))),
    )


def read_comparison(path: str) -> dict[str, np.ndarray | list[str]]:
    _, body = _split_comments(path)
    if not body:
        raise NoDataError(f"{path}: no rows")
    rows = list(csv.reader(body))
    header = rows[0]
    _require(header, COMPARISON_COLUMNS, path)
    idx = {c: header.index(c) for c in COMPARISON_COLUMNS}
    data = rows[1:]
    if not data:
        raise NoDataError(f"{path}: header only, no rows")
    out: dict[str, np.ndarray | list[str]] = {
        "policy": [r[idx["policy"]] for r in data]}
    for name in COMPARISON_COLUMNS[1:]:
        try:
            out[name] = np.array([float(r[idx[name]]) for r in data])
        except (ValueError, IndexError) as exc:
            raise SchemaError(f"{path}: bad value in column {name!r}: {exc}")
    return out
