import shutil

import pytest

from bnetlab import mapping
from bnetlab._tags import claim


def _copy(tmp_path):
    dst = tmp_path / "claims.txt"
    shutil.copy(mapping.DEFAULT_TABLE, dst)
    return dst


def test_fresh_checkout_is_consistent():
    assert mapping.mapping_problems() == []
    assert mapping.check_mapping()


def test_deleting_a_row_names_the_missing_claim(tmp_path):
    table = _copy(tmp_path)
    lines = table.read_text().splitlines()
    kept = [ln for ln in lines if not ln.startswith("sticky-time-law ")]
    assert len(kept) == len(lines) - 1
    table.write_text("\n".join(kept) + "\n")
    problems = mapping.mapping_problems(table)
    assert not mapping.check_mapping(table)
    assert any("sticky-time-law" in p and "missing from the table" in p for p in problems)


def test_unreferenced_row_is_rejected(tmp_path):
    table = _copy(tmp_path)
    with table.open("a") as f:
        f.write("made-up-claim | lattice.sample_config | tests/test_lattice.py::nothing_here"
                " | verified-deterministic | -\n")
    problems = mapping.mapping_problems(table)
    assert any("made-up-claim" in p and "not tagged" in p for p in problems)
    assert any("no test tests/test_lattice.py::nothing_here" in p for p in problems)


def test_bad_rows(tmp_path):
    table = _copy(tmp_path)
    text = table.read_text()
    extra = ("density-scaling-limit | experiments.density_experiment | tests/test_acceptance.py::"
             "test_c1_density_formula | verified-statistical | 1\n"
             "ghost | - | tests/nowhere.py::test_x | maybe | 0\n"
             "ghost2 | nosuch.thing | tests/test_lattice.py::test_x | verified-deterministic | 0\n")
    table.write_text(text + extra)
    problems = mapping.mapping_problems(table)
    assert "duplicate row for density-scaling-limit" in problems
    assert any("bad status 'maybe'" in p for p in problems)
    assert any("no test file tests/nowhere.py" in p for p in problems)
    assert any("cannot resolve bnetlab.nosuch.thing" in p for p in problems)


def test_malformed_line(tmp_path):
    table = tmp_path / "claims.txt"
    table.write_text("a | b | c\n")
    with pytest.raises(ValueError, match="expected 5 fields"):
        mapping.read_table(table)


def test_every_table_operation_carries_its_tag():
    tags = mapping.source_tags()
    for row in mapping.read_table():
        if row["op"] != "-":
            assert row["slug"] in getattr(mapping._resolve(row["op"]), "__claims__", ())
    assert set(tags) <= {r["slug"] for r in mapping.read_table()}


def test_claim_decorator_stacks():
    @claim("a")
    @claim("b", "c")
    def f():
        return 1

    assert f() == 1 and f.__claims__ == ("b", "c", "a")
