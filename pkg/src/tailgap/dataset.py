"""Firm-snapshot ingestion, validation and sector aggregation.

A *snapshot* is the set of firms on one yearly list (e.g. a Forbes Global
2000 vintage).  List year N describes balance sheets of year N-1; asset
values are stored in billions of USD throughout the library.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import DataError

logger = logging.getLogger(__name__)

#: Industries counted as financial.  Closed enumeration; anything else is
#: non-financial unless a classifier override is supplied.
FINANCIAL_INDUSTRIES = frozenset({
    "Banking",
    "Diversified Financials",
    "Insurance",
    "Consumer Financial Services",
    "Diversified Insurance",
    "Insurance Brokers",
    "Investment Services",
    "Major Banks",
    "Regional Banks",
    "Rental & Leasing",
    "Life & Health Insurance",
    "Thrifts & Mortgage Finance",
    "Property & Casualty Insurance",
})

_REQUIRED_COLUMNS = ("name", "industry", "assets", "profits")
_OPTIONAL_COLUMNS = ("sales", "market_value")


@dataclass(frozen=True)
class FirmRecord:
    """One firm-year row.  Assets in billions of USD, strictly positive."""

    name: str
    industry: str
    assets: float
    profits: float | None = None
    sales: float | None = None
    market_value: float | None = None

    def __post_init__(self):
        if not self.industry:
            raise DataError(f"firm {self.name!r}: industry must be non-empty")
        if not (self.assets > 0):
            raise DataError(f"firm {self.name!r}: assets must be positive, got {self.assets}")


def _rank_key(firm: FirmRecord):
    # Descending assets; ties broken by name ascending.  Python compares
    # str by code point, which for UTF-8 text coincides with byte order.
    return (-firm.assets, firm.name)


@dataclass(frozen=True, eq=True)
class Snapshot:
    """All firms of one list year, immutable once constructed.

    ``n_rejected_rows`` is loader bookkeeping (rows dropped for violating
    record invariants) and is excluded from equality.
    """

    list_year: int
    firms: tuple[FirmRecord, ...]
    n_rejected_rows: int = field(default=0, compare=False)

    def __post_init__(self):
        if not self.firms:
            raise DataError(f"snapshot {self.list_year}: zero valid rows")

    @property
    def data_year(self) -> int:
        """Balance-sheet year: the list refers to the previous year."""
        return self.list_year - 1

    def sorted_firms(self) -> tuple[FirmRecord, ...]:
        """Firms sorted by descending assets, deterministic tie-break."""
        return tuple(sorted(self.firms, key=_rank_key))

    def sizes(self):
        """Asset sizes in rank order (descending), as a list of floats."""
        return [f.assets for f in self.sorted_firms()]

    def filter(self, keep) -> "Snapshot":
        """New snapshot keeping only firms for which ``keep(firm)`` is true."""
        kept = tuple(f for f in self.firms if keep(f))
        if not kept:
            raise DataError(f"snapshot {self.list_year}: filter left zero firms")
        return Snapshot(self.list_year, kept)


@dataclass(frozen=True)
class SectorClassifier:
    """Total classification of industry strings into financial / other.

    ``strict`` escalates unlisted industries to an error instead of
    defaulting them to non-financial (useful when validating a file that
    is supposed to contain financial firms only).
    """

    financial_industries: frozenset[str] = FINANCIAL_INDUSTRIES
    strict: bool = False

    def is_financial(self, industry: str) -> bool:
        if industry in self.financial_industries:
            return True
        if self.strict:
            raise DataError(f"unknown industry {industry!r} (strict classification)")
        return False


def load_classifier(path: str | Path, strict: bool = False) -> SectorClassifier:
    """Read a classifier override: one financial industry per line.

    Blank lines and lines starting with '#' are skipped.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"classifier file not found: {path}")
    industries = set()
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            industries.add(line)
    if not industries:
        raise DataError(f"classifier file {path} lists no industries")
    return SectorClassifier(frozenset(industries), strict=strict)


def _parse_float(text: str | None) -> float | None:
    if text is None:
        return None
    text = text.strip()
    if not text:
        return None
    return float(text)


def load_snapshot(path: str | Path, list_year: int) -> Snapshot:
    """Parse one snapshot CSV (schema ``name,industry,assets,profits[,sales,market_value]``).

    Rows with missing/non-positive assets, an empty industry, or unparseable
    numeric fields are rejected; the rejected count is kept on the snapshot
    and each rejection is logged at DEBUG level.

    Raises
    ------
    DataError
        Missing file, malformed header, or zero valid rows.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"snapshot file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if header is None:
            raise DataError(f"{path}: empty file, no header")
        missing = [c for c in _REQUIRED_COLUMNS if c not in header]
        if missing:
            raise DataError(f"{path}: malformed header, missing columns {missing}")

        firms: list[FirmRecord] = []
        n_rejected = 0
        for lineno, row in enumerate(reader, start=2):
            try:
                assets = _parse_float(row.get("assets"))
                if assets is None or assets <= 0:
                    raise ValueError(f"assets {row.get('assets')!r}")
                firm = FirmRecord(
                    name=(row.get("name") or "").strip(),
                    industry=(row.get("industry") or "").strip(),
                    assets=assets,
                    profits=_parse_float(row.get("profits")),
                    sales=_parse_float(row.get("sales")),
                    market_value=_parse_float(row.get("market_value")),
                )
            except (ValueError, DataError) as exc:
                n_rejected += 1
                logger.debug("%s:%d rejected row: %s", path, lineno, exc)
                continue
            firms.append(firm)

    if not firms:
        raise DataError(f"{path}: zero valid rows ({n_rejected} rejected)")
    return Snapshot(list_year=list_year, firms=tuple(firms), n_rejected_rows=n_rejected)


def write_snapshot(snapshot: Snapshot, path: str | Path) -> None:
    """Write a snapshot back to CSV with exact float round-trip fidelity."""

    def fmt(v: float | None) -> str:
        return "" if v is None else repr(v)

    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_REQUIRED_COLUMNS + _OPTIONAL_COLUMNS)
        for f in snapshot.firms:
            writer.writerow([f.name, f.industry, repr(f.assets), fmt(f.profits),
                             fmt(f.sales), fmt(f.market_value)])


@dataclass(frozen=True)
class SectorTotals:
    """Aggregates for one sector.  Sums skip missing optional fields."""

    count: int
    assets: float
    profits: float
    sales: float
    market_value: float


@dataclass(frozen=True)
class SectorSummary:
    """Financial vs non-financial aggregates for one snapshot."""

    list_year: int
    financial: SectorTotals
    non_financial: SectorTotals

    def total(self, quantity: str) -> float:
        return getattr(self.financial, quantity) + getattr(self.non_financial, quantity)

    def financial_share(self, quantity: str = "assets") -> float:
        """Financial share of a quantity; 0.0 when the grand total is zero."""
        grand = self.total(quantity)
        if grand == 0:
            return 0.0
        return getattr(self.financial, quantity) / grand


def _totals(firms: Iterable[FirmRecord]) -> SectorTotals:
    firms = list(firms)
    return SectorTotals(
        count=len(firms),
        assets=sum(f.assets for f in firms),
        profits=sum(f.profits for f in firms if f.profits is not None),
        sales=sum(f.sales for f in firms if f.sales is not None),
        market_value=sum(f.market_value for f in firms if f.market_value is not None),
    )


def sector_summary(snapshot: Snapshot,
                   classifier: SectorClassifier | None = None) -> SectorSummary:
    """Totals and shares by sector.

    Financial + non-financial totals equal the grand totals exactly by
    construction (each firm contributes to exactly one side).
    """
    classifier = classifier or SectorClassifier()
    fin: list[FirmRecord] = []
    nonfin: list[FirmRecord] = []
    for f in snapshot.firms:
        (fin if classifier.is_financial(f.industry) else nonfin).append(f)
    return SectorSummary(snapshot.list_year, _totals(fin), _totals(nonfin))
