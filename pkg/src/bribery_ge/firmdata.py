"""Firm survey ingestion, outlier screening, modern/traditional classification
and technology-specific bribery moments."""
from __future__ import annotations

import csv
import io
import logging
import math
import warnings
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Iterable, Optional, TextIO

import numpy as np

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "survey_id",
    "sales",
    "capital",
    "labor_cost",
    "intermediate_cost",
    "workers",
    "bribe_share",
)
MONETARY = ("sales", "capital", "labor_cost", "intermediate_cost")
MIN_SURVEY_FIRMS = 10


class FirmDataError(ValueError):
    pass


@dataclass(frozen=True)
class FirmRecord:
    survey_id: str
    sales: float
    capital: float
    labor_cost: float
    intermediate_cost: float
    workers: Optional[float] = None
    bribe_share: Optional[float] = None

    def __post_init__(self):
        for name in MONETARY:
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise FirmDataError(f"{name} must be finite and >= 0, got {v!r}")
        if self.workers is not None and not (math.isfinite(self.workers) and self.workers > 0):
            raise FirmDataError(f"workers must be > 0, got {self.workers!r}")
        if self.bribe_share is not None and not (0.0 <= self.bribe_share <= 1.0):
            raise FirmDataError(f"bribe_share must lie in [0, 1], got {self.bribe_share!r}")


@dataclass(frozen=True)
class BriberyRegime:
    """Bernoulli bribe law per technology: tau_j = tau_bar_j w.p. p_j, else 0."""

    p0: float = 0.0
    tau0: float = 0.0
    p1: float = 0.0
    tau1: float = 0.0

    def __post_init__(self):
        for name in ("p0", "tau0", "p1", "tau1"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")

    def p(self, j: int) -> float:
        return (self.p0, self.p1)[j]

    def tau(self, j: int) -> float:
        return (self.tau0, self.tau1)[j]

    def outcomes(self, j: int) -> list[tuple[float, float]]:
        """(probability, bribe share) pairs of the bribe law of technology j."""
        return [(1.0 - self.p(j), 0.0), (self.p(j), self.tau(j))]

    def pmf(self, j: int, tau: float) -> float:
        return sum(prob for prob, t in self.outcomes(j) if t == tau)

    def expected_bribe(self, j: int) -> float:
        return self.p(j) * self.tau(j)


@dataclass
class ClassifiedPanel:
    records: list
    labels: list
    threshold: float
    kappa_basis: str = "labor_cost"
    rejected: list = field(default_factory=list)

    def by_label(self, j: int) -> list:
        return [r for r, lab in zip(self.records, self.labels) if lab == j]

    @property
    def modern_share(self) -> float:
        return sum(self.labels) / len(self.labels) if self.labels else float("nan")

    @property
    def modern_output_share(self) -> float:
        total = sum(r.sales for r in self.records)
        modern = sum(r.sales for r, lab in zip(self.records, self.labels) if lab == 1)
        return modern / total if total > 0 else float("nan")


# --------------------------------------------------------------------------
# ingestion

def _parse_optional(text: str) -> Optional[float]:
    text = text.strip()
    return None if text == "" else float(text)


def load_firm_records(source, errors: Optional[list] = None) -> list:
    """Read firm rows from a CSV path or text stream.

    Rows that fail numeric parsing or record invariants are skipped; a
    diagnostic naming the row and column is logged and, if ``errors`` is a
    list, appended to it.
    """
    if isinstance(source, (bytes, bytearray)):
        source = io.StringIO(source.decode("utf-8"))
    elif isinstance(source, str) or hasattr(source, "__fspath__"):
        try:
            with open(source, newline="", encoding="utf-8") as fh:
                return load_firm_records(fh, errors)
        except OSError as exc:
            raise FirmDataError(f"cannot read firm data {source!s}: {exc}") from exc
    elif isinstance(source, (io.RawIOBase, io.BufferedIOBase)):
        source = io.TextIOWrapper(source, encoding="utf-8", newline="")

    reader = csv.reader(source)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise FirmDataError("firm data is empty (header required)") from None
    except (UnicodeDecodeError, csv.Error) as exc:
        raise FirmDataError(f"unreadable firm data: {exc}") from exc
    if tuple(header) != CSV_COLUMNS:
        raise FirmDataError(f"header mismatch: expected {','.join(CSV_COLUMNS)}, got {','.join(header)}")

    records = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        problem = None
        if len(row) != len(CSV_COLUMNS):
            problem = f"row {lineno}: expected {len(CSV_COLUMNS)} columns, got {len(row)}"
        else:
            values = dict(zip(CSV_COLUMNS, row))
            parsed = {"survey_id": values["survey_id"].strip()}
            for col in CSV_COLUMNS[1:]:
                try:
                    if col in MONETARY:
                        parsed[col] = float(values[col])
                    else:
                        parsed[col] = _parse_optional(values[col])
                except ValueError:
                    problem = f"row {lineno}: column '{col}' is not numeric ({values[col]!r})"
                    break
                v = parsed[col]
                if v is not None and not math.isfinite(v):
                    problem = f"row {lineno}: column '{col}' is not finite"
                    break
                if col in MONETARY and v < 0:
                    problem = f"row {lineno}: column '{col}' is negative ({v!r})"
                    break
                if col == "bribe_share" and v is not None and not 0 <= v <= 1:
                    problem = f"row {lineno}: column 'bribe_share' outside [0, 1] ({v!r})"
                    break
                if col == "workers" and v is not None and v <= 0:
                    problem = f"row {lineno}: column 'workers' must be positive ({v!r})"
                    break
            if problem is None:
                records.append(FirmRecord(**parsed))
        if problem is not None:
            log.warning("rejected firm record: %s", problem)
            if errors is not None:
                errors.append(problem)
    return records


def split_surveys(records: Iterable[FirmRecord], min_firms: int = MIN_SURVEY_FIRMS):
    """Group records by survey, dropping surveys with fewer than ``min_firms`` firms.

    Returns (surveys, dropped) where ``dropped`` maps survey id to a reason code.
    """
    groups: "OrderedDict[str, list]" = OrderedDict()
    for rec in records:
        groups.setdefault(rec.survey_id, []).append(rec)
    surveys, dropped = OrderedDict(), {}
    for sid in sorted(groups):
        recs = groups[sid]
        if len(recs) < min_firms:
            warnings.warn(f"survey {sid} has {len(recs)} firms (< {min_firms}); skipped")
            dropped[sid] = "too_few_firms"
        elif all(r.bribe_share is None for r in recs):
            dropped[sid] = "no_bribe_reports"
        else:
            surveys[sid] = recs
    return surveys, dropped


# --------------------------------------------------------------------------
# screening and classification

def filter_outliers(records: list, k: float = 3.0) -> list:
    """Drop records with any monetary field more than ``k`` sample sd from its mean.

    One pass; the flags of the four fields are combined (union).
    """
    if not k > 0:
        raise ValueError("k must be positive")
    if len(records) < 2:
        raise FirmDataError("need at least 2 records to estimate a standard deviation")
    data = np.array([[getattr(r, f) for f in MONETARY] for r in records])
    mu = data.mean(axis=0)
    sd = data.std(axis=0, ddof=1)
    flagged = (np.abs(data - mu) > k * sd).any(axis=1)
    return [r for r, bad in zip(records, flagged) if not bad]


def kmeans_threshold(ratios) -> float:
    """Exact two-cluster 1-D k-means split of capital-labor ratios.

    Scans every split between consecutive distinct sorted values and returns
    the midpoint of the gap realising the minimum within-group sum of squares.
    """
    x = np.sort(np.asarray(ratios, dtype=float))
    if x.size < 2 or x[0] == x[-1]:
        raise ValueError("no split exists: need at least two distinct ratios")
    n = x.size
    xc = x - x.mean()
    c1 = np.cumsum(xc)
    c2 = np.cumsum(xc * xc)
    k = np.arange(1, n)  # size of the lower group
    left_sum, left_sq = c1[:-1], c2[:-1]
    right_sum, right_sq = c1[-1] - left_sum, c2[-1] - left_sq
    wgss = (left_sq - left_sum**2 / k) + (right_sq - right_sum**2 / (n - k))
    valid = x[1:] > x[:-1]
    wgss = np.where(valid, wgss, np.inf)
    i = int(np.argmin(wgss))
    return 0.5 * (x[i] + x[i + 1])


def kappa(record: FirmRecord, basis: str = "labor_cost") -> float:
    denom = record.workers if basis == "workers" else record.labor_cost
    if denom is None or denom <= 0:
        raise FirmDataError(f"capital-labor ratio undefined for survey {record.survey_id} record (basis={basis})")
    return record.capital / denom


def resolve_kappa_basis(records: list, basis: str = "auto") -> str:
    """'auto' uses worker counts when every record has them, labour cost otherwise."""
    if basis == "auto":
        return "workers" if records and all(r.workers is not None for r in records) else "labor_cost"
    if basis not in ("labor_cost", "workers"):
        raise ValueError(f"unknown kappa basis {basis!r}")
    return basis


def classify(records: list, threshold: Optional[float] = None, basis: str = "auto") -> ClassifiedPanel:
    """Label firms modern (1) when kappa exceeds the threshold, traditional (0) otherwise.

    With ``threshold=None`` the k-means split of the usable records is used.
    Records without a defined kappa are dropped with a diagnostic.
    """
    basis = resolve_kappa_basis(records, basis)
    kept, ks, rejected = [], [], []
    for i, rec in enumerate(records):
        try:
            ks.append(kappa(rec, basis))
            kept.append(rec)
        except FirmDataError as exc:
            log.warning("record %d rejected: %s", i, exc)
            rejected.append((i, str(exc)))
    if threshold is None:
        threshold = kmeans_threshold(ks)
    labels = [1 if kv > threshold else 0 for kv in ks]
    return ClassifiedPanel(records=kept, labels=labels, threshold=float(threshold),
                           kappa_basis=basis, rejected=rejected)


def bribery_moments(panel: ClassifiedPanel, weighting: str = "sales") -> BriberyRegime:
    """Incidence p_j and mean positive bribe share tau_j per technology.

    p_j counts firms reporting a positive bribe among firms of technology j
    with a bribe report; tau_j averages the positive reports, weighted by
    sales (or unweighted with ``weighting='equal'``).
    """
    if weighting not in ("sales", "equal"):
        raise ValueError(f"unknown weighting {weighting!r}")
    out = {}
    for j in (0, 1):
        reported = [r for r in panel.by_label(j) if r.bribe_share is not None]
        positive = [r for r in reported if r.bribe_share > 0]
        if not reported:
            warnings.warn(f"no bribe reports for technology {j}; using p=0, tau=0")
        if not positive:
            out[f"p{j}"], out[f"tau{j}"] = 0.0, 0.0
            continue
        if weighting == "sales":
            wts = np.array([r.sales for r in positive], dtype=float)
            if wts.sum() <= 0:
                wts = np.ones(len(positive))
        else:
            wts = np.ones(len(positive))
        shares = np.array([r.bribe_share for r in positive])
        out[f"p{j}"] = len(positive) / len(reported)
        out[f"tau{j}"] = float(wts @ shares / wts.sum())
    return BriberyRegime(**out)


def survey_moments(survey_id: str, records: list, k: float = 3.0, basis: str = "auto",
                   weighting: str = "sales") -> dict:
    """Moment row for one survey after screening and classification."""
    screened = filter_outliers(records, k)
    panel = classify(screened, basis=basis)
    regime = bribery_moments(panel, weighting)
    return {
        "survey_id": survey_id,
        "n_firms": len(panel.records),
        "modern_share": panel.modern_share,
        "modern_output_share": panel.modern_output_share,
        "tau0": regime.tau0,
        "p0": regime.p0,
        "tau1": regime.tau1,
        "p1": regime.p1,
        "threshold": panel.threshold,
        "panel": panel,
    }


MOMENT_COLUMNS = ("survey_id", "n_firms", "modern_share", "modern_output_share",
                  "tau0", "p0", "tau1", "p1", "threshold")


def write_moment_rows(rows: list, out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(MOMENT_COLUMNS)
    for row in rows:
        writer.writerow([row[c] if isinstance(row[c], (str, int)) else repr(float(row[c]))
                         for c in MOMENT_COLUMNS])
