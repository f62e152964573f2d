"""Grouped categorical panel data: frequency tables over response patterns.

A panel table counts how often each response pattern (one category per
measurement occasion) was observed, separately per group.  Patterns are
tuples of 1-based category indices; cells absent from the table are
semantically zero.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterator, Mapping

__all__ = [
    "PanelDataError",
    "PanelSchema",
    "PanelTable",
    "parse_panel_csv",
    "write_panel_csv",
    "total_count",
    "merge_categories",
    "manifest_stability",
]


class PanelDataError(ValueError):
    """Raised for malformed panel data or schema violations."""


@dataclass(frozen=True)
class PanelSchema:
    """Ordered category and group labels used to map CSV values to indices."""

    categories: tuple[str, ...]
    groups: tuple[str, ...]

    def __post_init__(self):
        if len(self.categories) < 2:
            raise PanelDataError("schema needs at least 2 categories")
        if len(self.groups) < 1:
            raise PanelDataError("schema needs at least 1 group")
        if len(set(self.categories)) != len(self.categories):
            raise PanelDataError("duplicate category labels in schema")
        if len(set(self.groups)) != len(self.groups):
            raise PanelDataError("duplicate group labels in schema")

    @classmethod
    def from_json(cls, text: str) -> "PanelSchema":
        doc = json.loads(text)
        try:
            return cls(tuple(doc["categories"]), tuple(doc["groups"]))
        except KeyError as exc:
            raise PanelDataError(f"schema is missing key {exc}") from None

    @classmethod
    def from_file(cls, path: str | Path) -> "PanelSchema":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def category_index(self, label: str) -> int:
        """1-based index of a category label."""
        try:
            return self.categories.index(label) + 1
        except ValueError:
            raise PanelDataError(f"unknown category label {label!r}") from None


@dataclass(frozen=True)
class PanelTable:
    """Immutable frequency table over response patterns, per group.

    cells maps (group label, pattern) -> count, where pattern is a
    length-T tuple of 1-based category indices.  Zero-count cells are
    dropped at construction so equality and round-trips are canonical.
    """

    occasions: int
    categories: tuple[str, ...]
    groups: tuple[str, ...]
    cells: Mapping[tuple[str, tuple[int, ...]], int] = field(default_factory=dict)

    def __post_init__(self):
        if self.occasions < 1:
            raise PanelDataError("occasions must be >= 1")
        if len(self.categories) < 2:
            raise PanelDataError("need at least 2 categories")
        if len(self.groups) < 1:
            raise PanelDataError("need at least 1 group")
        J = len(self.categories)
        clean: dict[tuple[str, tuple[int, ...]], int] = {}
        for (group, pattern), count in self.cells.items():
            if group not in self.groups:
                raise PanelDataError(f"unknown group label {group!r}")
            if len(pattern) != self.occasions:
                raise PanelDataError(
                    f"pattern {pattern} has length {len(pattern)}, expected {self.occasions}"
                )
            if any(not (1 <= c <= J) for c in pattern):
                raise PanelDataError(f"pattern {pattern} has entries outside 1..{J}")
            if not isinstance(count, int) or isinstance(count, bool):
                raise PanelDataError(f"count for {group}/{pattern} is not an integer")
            if count < 0:
                raise PanelDataError(f"negative count for {group}/{pattern}")
            if count > 0:
                clean[(group, tuple(pattern))] = count
        object.__setattr__(self, "cells", MappingProxyType(clean))

    @property
    def n_categories(self) -> int:
        return len(self.categories)

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    def group_index(self, group: str) -> int:
        try:
            return self.groups.index(group)
        except ValueError:
            raise PanelDataError(f"unknown group label {group!r}") from None

    def count(self, group: str, pattern: tuple[int, ...]) -> int:
        return self.cells.get((group, tuple(pattern)), 0)

    def group_cells(self, group: str) -> Iterator[tuple[tuple[int, ...], int]]:
        """(pattern, count) pairs with positive counts for one group."""
        self.group_index(group)
        for (g, pattern), count in self.cells.items():
            if g == group:
                yield pattern, count

    def group_totals(self) -> dict[str, int]:
        return {g: total_count(self, g) for g in self.groups}


def parse_panel_csv(text: str, schema: PanelSchema) -> PanelTable:
    """Parse a `group,t1,...,tT,count` CSV into a PanelTable.

    Lines starting with '#' are comments.  Duplicate (group, pattern)
    rows are summed.  Category and group values must be labels declared
    by the schema.
    """
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row and not row[0].lstrip().startswith("#")]
    if not rows:
        raise PanelDataError("empty input: no header row")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[0] != "group" or header[-1] != "count":
        raise PanelDataError("header must be 'group,t1,...,tT,count'")
    occ_cols = header[1:-1]
    if not occ_cols:
        raise PanelDataError("no occasion columns in header: T inferred as 0")
    expected = [f"t{i}" for i in range(1, len(occ_cols) + 1)]
    if occ_cols != expected:
        raise PanelDataError(
            f"occasion columns must be {','.join(expected)}, got {','.join(occ_cols)}"
        )
    T = len(occ_cols)

    cells: dict[tuple[str, tuple[int, ...]], int] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        row = [v.strip() for v in row]
        if len(row) != T + 2:
            raise PanelDataError(f"line {lineno}: expected {T + 2} fields, got {len(row)}")
        group = row[0]
        if group not in schema.groups:
            raise PanelDataError(f"line {lineno}: unknown group label {group!r}")
        pattern = tuple(schema.category_index(v) for v in row[1:-1])
        raw = row[-1]
        try:
            count = int(raw)
        except ValueError:
            raise PanelDataError(f"line {lineno}: count {raw!r} is not an integer") from None
        if count < 0:
            raise PanelDataError(f"line {lineno}: negative count {count}")
        key = (group, pattern)
        cells[key] = cells.get(key, 0) + count

    return PanelTable(
        occasions=T,
        categories=schema.categories,
        groups=schema.groups,
        cells=cells,
    )


def write_panel_csv(table: PanelTable) -> str:
    """Render a PanelTable back to CSV text (inverse of parse_panel_csv)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["group"] + [f"t{i}" for i in range(1, table.occasions + 1)] + ["count"])
    for group in table.groups:
        for pattern in sorted(p for (g, p) in table.cells if g == group):
            labels = [table.categories[c - 1] for c in pattern]
            writer.writerow([group] + labels + [table.cells[(group, pattern)]])
    return out.getvalue()


def total_count(table: PanelTable, group: str) -> int:
    """Sum of frequencies over all patterns in one group."""
    table.group_index(group)
    return sum(count for (g, _), count in table.cells.items() if g == group)


def merge_categories(table: PanelTable, mapping: Mapping[int, int]) -> PanelTable:
    """Collapse categories per an old->new index mapping (both 1-based).

    The mapping must cover every old category and hit every new index
    1..J' with J' >= 2.  Frequencies of patterns that coincide after
    the mapping are summed.
    """
    J = table.n_categories
    missing = [c for c in range(1, J + 1) if c not in mapping]
    if missing:
        raise PanelDataError(f"mapping is not total: old categories {missing} unmapped")
    new_indices = sorted(set(mapping.values()))
    J_new = len(new_indices)
    if J_new < 2:
        raise PanelDataError("merged table would have fewer than 2 categories")
    if new_indices != list(range(1, J_new + 1)):
        raise PanelDataError(f"mapping is not surjective onto 1..{J_new}: image {new_indices}")

    new_labels = []
    for j in range(1, J_new + 1):
        olds = [table.categories[c - 1] for c in range(1, J + 1) if mapping[c] == j]
        new_labels.append(olds[0] if len(olds) == 1 else "+".join(olds))

    cells: dict[tuple[str, tuple[int, ...]], int] = {}
    for (group, pattern), count in table.cells.items():
        new_pattern = tuple(mapping[c] for c in pattern)
        key = (group, new_pattern)
        cells[key] = cells.get(key, 0) + count

    return PanelTable(
        occasions=table.occasions,
        categories=tuple(new_labels),
        groups=table.groups,
        cells=cells,
    )


def manifest_stability(table: PanelTable, group: str) -> float:
    """Observed proportion of constant patterns (c,c,...,c) in one group."""
    n = total_count(table, group)
    if n == 0:
        raise PanelDataError(f"group {group!r} has zero total count")
    constant = sum(
        count for (g, pattern), count in table.cells.items()
        if g == group and len(set(pattern)) == 1
    )
    return constant / n
