import xml.etree.ElementTree as ET
from dataclasses import replace

import pytest

from locoutage.figures import (
    FIG3_COLUMNS,
    FIG4_COLUMNS,
    FIG5_COLUMNS,
    FigureSettings,
    Table,
    csv_to_table,
    default_settings,
    figure_tables,
    render_svg,
    table_to_csv,
    write_csv,
    write_svg,
)

SMALL = FigureSettings(n_values=(2, 3), trials=4000, seed=3)


def test_csv_format():
    t = Table("t", ("N", "x"), [(2, 0.1), (3, 1 / 3)])
    text = table_to_csv(t)
    assert text == "N,x\n2,0.10000000000000001\n3,0.33333333333333331\n"
    back = csv_to_table("t", text)
    assert back.rows == [(2.0, 0.1), (3.0, 1 / 3)]


def test_fig3_columns_and_rows():
    (t,) = figure_tables("fig3", SMALL)
    assert t.columns == FIG3_COLUMNS
    assert [row[0] for row in t.rows] == [2, 3]
    for row in t.rows:
        assert row[6] <= row[7]


def test_fig4_and_fig5_shapes():
    tables = figure_tables("fig4", replace(SMALL, n_values=(3,)))
    assert all(t.columns == FIG4_COLUMNS for t in tables)
    assert len(tables) == 3
    tables = figure_tables("fig5", replace(SMALL, n_values=(3, 4), thresholds=(1.5, 2.0, 8.0)))
    assert [t.name for t in tables] == ["fig5_N3", "fig5_N4"]
    assert tables[0].columns == FIG5_COLUMNS
    assert default_settings("fig5").n_values == (3, 4, 5)
    with pytest.raises(ValueError):
        figure_tables("fig9", SMALL)


def test_reruns_are_byte_identical(tmp_path):
    (t1,) = figure_tables("fig3", SMALL)
    (t2,) = figure_tables("fig3", replace(SMALL, workers=3))
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    a = write_csv(t1, tmp_path / "a")
    b = write_csv(t2, tmp_path / "b")
    assert a.read_bytes() == b.read_bytes()
    assert b"\r" not in a.read_bytes()


def test_svg_is_regenerable_from_csv(tmp_path):
    (t,) = figure_tables("fig3", SMALL)
    path = write_csv(t, tmp_path)
    svg_path = write_svg("fig3", [path], tmp_path / "fig3.svg")
    again = render_svg("fig3", {path.stem: path.read_text()})
    assert svg_path.read_text() == again
    root = ET.fromstring(again)
    assert root.tag.endswith("svg")
    assert len(root.findall("{http://www.w3.org/2000/svg}polyline")) >= 4


def test_svg_linear_axis_and_empty_curves():
    text = "N,allanchor_analytic\n2,0\n3,0\n"
    svg = render_svg("fig3", {"x": text}, log_y=True)
    ET.fromstring(svg)
    svg = render_svg("fig3", {"x": text}, log_y=False)
    ET.fromstring(svg)
