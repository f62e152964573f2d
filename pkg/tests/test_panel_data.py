import numpy as np
import pytest

from latent_chain.estimation import FitOptions, em_fit
from latent_chain.model_core import build_model_spec
from latent_chain.panel_data import (
    PanelDataError,
    PanelSchema,
    PanelTable,
    manifest_stability,
    merge_categories,
    parse_panel_csv,
    total_count,
    write_panel_csv,
)

from _oracles import regroup_cells

SCHEMA = PanelSchema(categories=("1", "2", "3"), groups=("doctoral", "post-doctoral"))


def test_parse_single_row():
    text = "group,t1,t2,t3,count\ndoctoral,1,1,1,143\n"
    table = parse_panel_csv(text, SCHEMA)
    assert table.count("doctoral", (1, 1, 1)) == 143
    assert table.occasions == 3


def test_parse_skips_comments_and_sums_duplicates():
    text = (
        "group,t1,t2,t3,count\n"
        "# a comment\n"
        "doctoral,1,2,3,5\n"
        "doctoral,1,2,3,7\n"
    )
    table = parse_panel_csv(text, SCHEMA)
    assert table.count("doctoral", (1, 2, 3)) == 12


def test_parse_header_only_is_legal_but_fit_fails():
    table = parse_panel_csv("group,t1,t2,t3,count\n", SCHEMA)
    assert len(table.cells) == 0
    assert total_count(table, "doctoral") == 0
    spec = build_model_spec(2, 3, 3, 3)
    with pytest.raises(Exception):
        em_fit(spec, table, FitOptions(starts=1, max_iterations=5))


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("group,t1,t2,t3,count\ndoctoral,1,4,1,3\n", "category"),
        ("group,t1,t2,t3,count\ndoctoral,1,1,1,-2\n", "negative"),
        ("group,t1,t2,t3,count\ndoctoral,1,1,1,2.5\n", "integer"),
        ("group,t1,t2,t3,count\ndoctoral,1,1,3\n", "fields"),
        ("group,count\ndoctoral,3\n", "occasion"),
        ("group,t1,t2,t3,count\nunknown,1,1,1,3\n", "group"),
    ],
)
def test_parse_rejects_malformed_input(text, fragment):
    with pytest.raises(PanelDataError) as err:
        parse_panel_csv(text, SCHEMA)
    assert fragment in str(err.value).lower()


def test_round_trip_is_identity(rng):
    cells = {}
    for group in SCHEMA.groups:
        for _ in range(12):
            pattern = tuple(int(c) for c in rng.integers(1, 4, size=3))
            cells[(group, pattern)] = cells.get((group, pattern), 0) + int(rng.integers(1, 50))
    table = PanelTable(occasions=3, categories=SCHEMA.categories, groups=SCHEMA.groups, cells=cells)
    again = parse_panel_csv(write_panel_csv(table), SCHEMA)
    assert dict(again.cells) == dict(table.cells)
    assert again == table


def test_cells_are_immutable():
    table = parse_panel_csv("group,t1,t2,t3,count\ndoctoral,1,1,1,3\n", SCHEMA)
    with pytest.raises(TypeError):
        table.cells[("doctoral", (1, 1, 1))] = 5


def test_total_count_bundled(bif_table):
    assert total_count(bif_table, "doctoral") == 1474
    assert total_count(bif_table, "post-doctoral") == 480
    assert sum(total_count(bif_table, g) for g in bif_table.groups) == 1954


def test_total_count_unknown_group(bif_table):
    with pytest.raises(PanelDataError):
        total_count(bif_table, "industrial")


def test_merge_identity(bif_table):
    merged = merge_categories(bif_table, {1: 1, 2: 2, 3: 3})
    assert dict(merged.cells) == dict(bif_table.cells)


def test_merge_four_to_three_preserves_totals(rng):
    schema = PanelSchema(categories=("a", "b", "c", "d"), groups=("g",))
    cells = {}
    for _ in range(25):
        pattern = tuple(int(c) for c in rng.integers(1, 5, size=2))
        cells[("g", pattern)] = cells.get(("g", pattern), 0) + int(rng.integers(1, 20))
    table = PanelTable(occasions=2, categories=schema.categories, groups=schema.groups, cells=cells)
    mapping = {1: 1, 2: 1, 3: 2, 4: 3}
    merged = merge_categories(table, mapping)
    assert merged.n_categories == 3
    assert total_count(merged, "g") == total_count(table, "g")
    assert dict(merged.cells) == regroup_cells(dict(table.cells), mapping)


def test_merge_rejects_partial_or_degenerate_mappings(bif_table):
    with pytest.raises(PanelDataError):
        merge_categories(bif_table, {1: 1, 2: 1})
    with pytest.raises(PanelDataError):
        merge_categories(bif_table, {1: 1, 2: 1, 3: 1})
    with pytest.raises(PanelDataError):
        merge_categories(bif_table, {1: 1, 2: 3, 3: 3})


def test_manifest_stability_bundled(bif_table):
    assert manifest_stability(bif_table, "doctoral") == pytest.approx((143 + 16 + 205) / 1474)
    assert manifest_stability(bif_table, "post-doctoral") == pytest.approx((31 + 5 + 78) / 480)


def test_manifest_stability_degenerate_cases():
    table = PanelTable(
        occasions=3, categories=("1", "2", "3"), groups=("g",),
        cells={("g", (1, 1, 1)): 10},
    )
    assert manifest_stability(table, "g") == 1.0
    empty = PanelTable(occasions=3, categories=("1", "2", "3"), groups=("g",), cells={})
    with pytest.raises(PanelDataError):
        manifest_stability(empty, "g")


def test_manifest_stability_bounds(rng):
    for _ in range(20):
        cells = {}
        for _ in range(10):
            pattern = tuple(int(c) for c in rng.integers(1, 4, size=3))
            cells[("g", pattern)] = int(rng.integers(1, 30))
        table = PanelTable(occasions=3, categories=("1", "2", "3"), groups=("g",), cells=cells)
        s = manifest_stability(table, "g")
        assert 0.0 <= s <= 1.0
        all_constant = all(len(set(p)) == 1 for (_, p) in table.cells)
        assert (s == 1.0) == all_constant
