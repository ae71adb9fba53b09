from mtlmas.milp import GE, LE, MilpModel, export_lp


def small_model() -> MilpModel:
    m = MilpModel()
    x = m.add_var("x", 0.0, 4.0)
    y = m.add_var("y")  # free
    z = m.add_binary("z")
    m.add_row({x: 1.0, y: -2.0}, LE, 3.0, "cap")
    m.add_row({z: 1.0, x: 0.5}, GE, 1.0, "link")
    m.add_objective_term(x, 2.0)
    m.add_objective_term(z, -1.0)
    return m


def test_export_sections_present():
    text = export_lp(small_model())
    for section in ("Minimize", "Subject To", "Bounds", "Binaries", "End"):
        assert section in text
    assert " cap: " in text
    assert "y free" in text
    assert "0 <= x <= 4" in text


def test_export_is_deterministic():
    assert export_lp(small_model()) == export_lp(small_model())


def test_export_golden_shape():
    lines = export_lp(small_model()).splitlines()
    assert lines[0].startswith("\\")
    assert lines[1] == "Minimize"
    assert lines[-1] == "End"
    # one row per constraint
    subject = lines.index("Subject To")
    bounds = lines.index("Bounds")
    assert bounds - subject - 1 == 2
