"""Cohort manifests and feature-table CSV serialization.

The manifest is JSON (it has to carry several named prediction inputs per
case); relative paths inside it are resolved against the manifest's own
directory.  Feature CSVs use the shortest round-trip decimal for every value
so identical tables always serialize to identical bytes.
"""

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .features.catalog import catalog_index, catalog_names


@dataclass(frozen=True)
class PredInput:
    """One model output for a case: a binary mask or a probability map."""

    name: str
    kind: str  # "mask" | "prob"
    path: Path

    def __post_init__(self):
        if self.kind not in ("mask", "prob"):
            raise ValueError(f"pred kind must be mask|prob, got {self.kind!r}")


@dataclass(frozen=True)
class CaseEntry:
    case_id: str
    image: Path
    ref_mask: Path
    pred: tuple
    survival_months: float | None = None

    def __post_init__(self):
        if not self.case_id:
            raise ValueError("case_id must be nonempty")
        if self.survival_months is not None and self.survival_months < 0:
            raise ValueError(f"survival_months must be >= 0, got {self.survival_months}")


@dataclass(frozen=True)
class CohortManifest:
    cases: tuple

    def __post_init__(self):
        if not self.cases:
            raise ValueError("manifest must contain at least one case")
        ids = [c.case_id for c in self.cases]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate case_id(s): {dupes}")

    def case_ids(self) -> list:
        return [c.case_id for c in self.cases]

    def by_id(self, case_id: str) -> CaseEntry:
        for c in self.cases:
            if c.case_id == case_id:
                return c
        raise KeyError(case_id)


def read_manifest(path, validate_paths: bool = False) -> CohortManifest:
    """Parse a cohort manifest; optionally check that every referenced file exists."""
    path = Path(path)
    base = path.parent
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: malformed JSON: {exc}") from exc
    if not isinstance(doc, dict) or "cases" not in doc:
        raise ValueError(f"{path}: manifest must be an object with a 'cases' list")
    cases = []
    for entry in doc["cases"]:
        preds = tuple(
            PredInput(p["name"], p["kind"], _resolve(base, p["path"]))
            for p in entry.get("pred", [])
        )
        months = entry.get("survival_months")
        cases.append(
            CaseEntry(
                case_id=entry["case_id"],
                image=_resolve(base, entry["image"]),
                ref_mask=_resolve(base, entry["ref_mask"]),
                pred=preds,
                survival_months=None if months is None else float(months),
            )
        )
    manifest = CohortManifest(tuple(cases))
    if validate_paths:
        for c in manifest.cases:
            for p in [c.image, c.ref_mask] + [pi.path for pi in c.pred]:
                if not Path(p).is_file():
                    raise FileNotFoundError(f"{path}: case {c.case_id}: missing file {p}")
    return manifest


def write_manifest(manifest: CohortManifest, path) -> None:
    """Write a manifest with paths stored relative to its directory when possible."""
    path = Path(path)
    base = path.parent.resolve()

    def rel(p: Path) -> str:
        p = Path(p).resolve()
        try:
            return p.relative_to(base).as_posix()
        except ValueError:
            return str(p)

    doc = {
        "cases": [
            {
                "case_id": c.case_id,
                "image": rel(c.image),
                "ref_mask": rel(c.ref_mask),
                "pred": [{"name": p.name, "kind": p.kind, "path": rel(p.path)} for p in c.pred],
                "survival_months": c.survival_months,
            }
            for c in manifest.cases
        ]
    }
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _resolve(base: Path, p) -> Path:
    p = Path(p)
    return p if p.is_absolute() else base / p


@dataclass(frozen=True)
class FeatureTable:
    """Named feature values per case; rows keyed by unique case_id."""

    columns: tuple
    rows: tuple  # of (case_id, tuple of float)

    def __post_init__(self):
        if len(set(self.columns)) != len(self.columns):
            raise ValueError("duplicate feature names in table")
        ids = [cid for cid, _ in self.rows]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate case_id in feature table")
        for cid, vals in self.rows:
            if len(vals) != len(self.columns):
                raise ValueError(f"row {cid!r} has {len(vals)} values for {len(self.columns)} columns")

    @classmethod
    def from_feature_vectors(cls, pairs) -> "FeatureTable":
        """Build a table from (case_id, FeatureVector) pairs in catalog column order."""
        columns = catalog_names()
        rows = tuple((cid, tuple(fv.as_list())) for cid, fv in pairs)
        return cls(columns=columns, rows=rows)

    def case_ids(self) -> list:
        return [cid for cid, _ in self.rows]

    def matrix(self):
        import numpy as np

        return np.array([vals for _, vals in self.rows], dtype=np.float64)


def _format_value(v: float) -> str:
    f = float(v)
    if math.isnan(f) or math.isinf(f):
        return "nan"
    return repr(f)


def write_feature_table(table: FeatureTable, path) -> None:
    """Serialize to CSV: header 'case_id,<names>', UTF-8, LF endings."""
    lines = ["case_id," + ",".join(table.columns)]
    lines += [cid + "," + ",".join(_format_value(v) for v in vals) for cid, vals in table.rows]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_feature_table(path) -> FeatureTable:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip() != ""]
    if not lines:
        raise ValueError(f"{path}: empty feature CSV")
    header = lines[0].split(",")
    if header[0] != "case_id":
        raise ValueError(f"{path}: first column must be case_id")
    columns = tuple(header[1:])
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(columns) + 1:
            raise ValueError(f"{path}: row has {len(parts) - 1} values for {len(columns)} columns")
        rows.append((parts[0], tuple(float(t) for t in parts[1:])))
    return FeatureTable(columns=columns, rows=tuple(rows))


def sort_catalog_columns(table: FeatureTable) -> FeatureTable:
    """Reorder catalog-named columns into catalog order (insertion-order independent)."""
    order = sorted(range(len(table.columns)), key=lambda i: catalog_index(table.columns[i]))
    columns = tuple(table.columns[i] for i in order)
    rows = tuple((cid, tuple(vals[i] for i in order)) for cid, vals in table.rows)
    return FeatureTable(columns=columns, rows=rows)
