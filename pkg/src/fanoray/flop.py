"""Flop intersection-number calculus on the resolution of a 4-fold flop.

The strict transform of each tracked divisor pulls back to the resolution
as the naive pullback plus a correction supported on the exceptional
divisors.  The correction coefficients are pinned by one vanishing
condition per curve contracted by the flopped side; rows on the flopped
side are then plain evaluations.  Coefficients are honest rationals
(halves occur), so nothing here assumes integrality.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from .model import FanoRecord, Finding, RecordError, RecordId, _expect_keys, \
    _id_at, _qvec_at
from .rational import QMat, QVec, rat_str, solve_linear


class FlopError(ValueError):
    pass


@dataclass(frozen=True)
class TestCurve:
    label: str
    pullback_row: QVec            # pairings with pulled-back tracked divisors
    exc_row: QVec                 # pairings with the exceptional divisors
    contracted_by_flop: bool


@dataclass(frozen=True)
class FlopConfig:
    record: RecordId
    ray: str
    tracked_divisors: tuple[str, ...]
    exceptional_divisors: tuple[str, ...]
    test_curves: tuple[TestCurve, ...]
    result_curves: tuple[str, ...]
    antiK_combo_tracked: QVec

    def curve(self, label: str) -> TestCurve:
        for c in self.test_curves:
            if c.label == label:
                return c
        raise KeyError(f"no test curve {label!r}")


@dataclass(frozen=True)
class FlopRowResult:
    label: str
    row: QVec                     # pairings with the tracked strict transforms
    antiK: Fraction


@dataclass(frozen=True)
class FlopResult:
    coeffs: QMat                  # tracked x exceptional correction matrix
    rows: tuple[FlopRowResult, ...]


def flop_config_from_json(data: dict, source: str = "flop") -> FlopConfig:
    _expect_keys(data, source,
                 {"record", "ray", "tracked_divisors", "exceptional_divisors",
                  "test_curves", "result_curves", "antiK_combo_tracked"})
    record = _id_at(data["record"], f"{source}.record")
    tracked = data["tracked_divisors"]
    exceptional = data["exceptional_divisors"]
    for key, val in (("tracked_divisors", tracked),
                     ("exceptional_divisors", exceptional)):
        if (not isinstance(val, list) or not val
                or not all(isinstance(s, str) for s in val)):
            raise RecordError(f"{source}.{key}", "expected array of strings")
    curves = []
    labels = set()
    for i, raw in enumerate(data["test_curves"]):
        path = f"{source}.test_curves[{i}]"
        _expect_keys(raw, path,
                     {"label", "pullback_row", "exc_row", "contracted_by_flop"})
        if raw["label"] in labels:
            raise RecordError(path, f"duplicate curve label {raw['label']!r}")
        labels.add(raw["label"])
        if not isinstance(raw["contracted_by_flop"], bool):
            raise RecordError(f"{path}.contracted_by_flop", "expected boolean")
        curves.append(TestCurve(
            raw["label"],
            _qvec_at(raw["pullback_row"], f"{path}.pullback_row", len(tracked)),
            _qvec_at(raw["exc_row"], f"{path}.exc_row", len(exceptional)),
            raw["contracted_by_flop"]))
    results = data["result_curves"]
    if not isinstance(results, list) or not all(r in labels for r in results):
        raise RecordError(f"{source}.result_curves",
                          "every result curve must be a test curve label")
    combo = _qvec_at(data["antiK_combo_tracked"],
                     f"{source}.antiK_combo_tracked", len(tracked))
    contracted = sum(c.contracted_by_flop for c in curves)
    if contracted < len(exceptional):
        raise RecordError(f"{source}.test_curves",
                          f"{contracted} contracted curves cannot pin "
                          f"{len(exceptional)} exceptional coefficients")
    if not isinstance(data["ray"], str):
        raise RecordError(f"{source}.ray", "expected string")
    return FlopConfig(record, data["ray"], tuple(tracked), tuple(exceptional),
                      tuple(curves), tuple(results), combo)


def parse_flop_config(raw) -> FlopConfig:
    if isinstance(raw, (bytes, bytearray)):
        raw = raw.decode("utf-8")
    if isinstance(raw, str):
        try:
            raw = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise RecordError("flop", f"bad JSON: {exc}") from None
    return flop_config_from_json(raw)


def solve_pullback_coeffs(cfg: FlopConfig) -> QMat:
    """Correction coefficients, one column per exceptional divisor.

    For each tracked divisor X_t the contracted curves impose
    (c, psi*X_t) + sum_s alpha_{t,s} (c, D^s) = 0; the system must
    determine every alpha exactly.
    """
    contracted = [c for c in cfg.test_curves if c.contracted_by_flop]
    a = QMat([c.exc_row.entries for c in contracted])
    coeff_rows = []
    for t in range(len(cfg.tracked_divisors)):
        b = QVec([-c.pullback_row[t] for c in contracted])
        solved = solve_linear(a, b)
        if solved is None:
            witnesses = _witness_curves(contracted, t)
            raise FlopError(
                f"inconsistent vanishing conditions for "
                f"{cfg.tracked_divisors[t]!r}: curves {witnesses}")
        alpha, ker = solved
        if ker:
            raise FlopError(
                f"underdetermined correction for {cfg.tracked_divisors[t]!r}: "
                f"kernel dimension {len(ker)}")
        coeff_rows.append(alpha.entries)
    return QMat(coeff_rows)


def _witness_curves(contracted: list[TestCurve], t: int) -> list[str]:
    from itertools import combinations
    for r in range(2, len(contracted) + 1):
        for subset in combinations(range(len(contracted)), r):
            a = QMat([contracted[i].exc_row.entries for i in subset])
            b = QVec([-contracted[i].pullback_row[t] for i in subset])
            if solve_linear(a, b) is None:
                return [contracted[i].label for i in subset]
    return [c.label for c in contracted]


def flopped_rows(cfg: FlopConfig, coeffs: QMat) -> FlopResult:
    """Evaluate every result curve against the corrected pullbacks.

    (l, X_t^+) = (l, psi*X_t) + sum_s alpha_{t,s} (l, D^s); the -K entry is
    the tracked-divisor combination of the row.  Contracted curves must
    pair to exactly zero with every corrected pullback; that is asserted,
    not assumed.
    """
    for c in cfg.test_curves:
        if not c.contracted_by_flop:
            continue
        for t in range(len(cfg.tracked_divisors)):
            value = c.pullback_row[t] + coeffs.row(t).dot(c.exc_row)
            if value != 0:
                raise FlopError(
                    f"contracted curve {c.label} pairs {rat_str(value)} != 0 "
                    f"with corrected {cfg.tracked_divisors[t]!r}")
    rows = []
    for label in cfg.result_curves:
        c = cfg.curve(label)
        row = QVec([c.pullback_row[t] + coeffs.row(t).dot(c.exc_row)
                    for t in range(len(cfg.tracked_divisors))])
        rows.append(FlopRowResult(label, row, cfg.antiK_combo_tracked.dot(row)))
    return FlopResult(coeffs, tuple(rows))


def compute_flop(cfg: FlopConfig) -> FlopResult:
    return flopped_rows(cfg, solve_pullback_coeffs(cfg))


def verify_against_table(record: FanoRecord, cfg: FlopConfig,
                         result: FlopResult) -> list[Finding]:
    """Exact cell-by-cell comparison of recomputed rows with the record's
    flop table for the flopped ray.  Empty findings = agreement."""
    base = cfg.record.base()
    if record.record_id.base() != base:
        raise FlopError(
            f"config is for {base.render()}, record is "
            f"{record.record_id.render()}")
    if record.basis_labels != cfg.tracked_divisors:
        raise FlopError(
            f"record basis {record.basis_labels} does not match tracked "
            f"divisors {cfg.tracked_divisors}")
    if cfg.ray not in record.flop_tables:
        raise FlopError(
            f"{record.record_id.render()} has no flop table for ray "
            f"{cfg.ray!r}")
    table = {row.label: row for row in record.flop_tables[cfg.ray]}
    findings: list[Finding] = []
    for computed in result.rows:
        key = f"flop_tables.{cfg.ray}.{computed.label}"
        if computed.label not in table:
            findings.append(Finding(
                "flop-table", key,
                f"no row labeled {computed.label!r} (table rows: "
                f"{sorted(table)})"))
            continue
        row = table[computed.label]
        if row.vec != computed.row or row.antiK != computed.antiK:
            findings.append(Finding(
                "flop-table", key,
                f"table says ({', '.join(row.vec.to_strings())} | "
                f"{rat_str(row.antiK)}), recomputation gives "
                f"({', '.join(computed.row.to_strings())} | "
                f"{rat_str(computed.antiK)})"))
    return findings
