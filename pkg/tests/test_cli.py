import json

import coarsebox as cb
from coarsebox.cli import main

from helpers import torus_graph


def test_quotient_sl2_and_roundtrip(tmp_path, capsys):
    out = tmp_path / "g.json"
    assert main(["quotient", "sl2", "--modulus", "16", "--out", str(out)]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed["num_vertices"] == 256
    assert cb.read_graph(out).num_vertices == 256


def test_quotient_determinism(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert main(["quotient", "sl2", "--modulus", "8", "--out", str(a)]) == 0
    assert main(["quotient", "sl2", "--modulus", "8", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_voltage_pipeline(tmp_path, capsys):
    bq = tmp_path / "b2.json"
    cover = tmp_path / "l2.json"
    cov_map = tmp_path / "map.json"
    assert main(["quotient", "bouquet", "--n", "2", "--out", str(bq)]) == 0
    assert (
        main(
            ["quotient", "voltage", "--input", str(bq), "--m", "2",
             "--out", str(cover), "--map-out", str(cov_map)]
        )
        == 0
    )
    assert cb.read_graph(cover).num_vertices == 4
    assert json.loads(cov_map.read_text()) == [0, 0, 0, 0]


def test_quotient_perms(tmp_path, capsys):
    src = tmp_path / "p.json"
    src.write_text(json.dumps({"n_generators": 1, "perms": [[1, 2, 0]]}))
    out = tmp_path / "g.json"
    assert main(["quotient", "perms", "--input", str(src), "--out", str(out)]) == 0
    assert cb.read_graph(out).num_vertices == 3


def test_detect_command(tmp_path, capsys):
    pres = tmp_path / "z2.pres"
    pres.write_text("gens 2\nrel abAB\n")
    cb.write_graph(torus_graph(10), tmp_path / "t10.json")
    cb.write_graph(torus_graph(50), tmp_path / "t50.json")
    out = tmp_path / "det.json"
    code = main(
        ["--no-figures", "detect", "--presentation", str(pres),
         "--quotient", str(tmp_path / "t10.json"), "--deep", str(tmp_path / "t50.json"),
         "--out", str(out), "--emit", "dot"]
    )
    assert code == 0
    blob = json.loads(out.read_text())
    assert blob["window"] == [2] and blob["h1"] == {"betti": 2, "torsion": []}
    assert (tmp_path / "det.csv").exists()
    dot = (tmp_path / "det.dot").read_text()
    assert dot.startswith("digraph") and "// cell at" in dot


def test_oracle_command(tmp_path, capsys):
    import numpy as np

    C8 = cb.from_permutations(1, [list(np.roll(np.arange(8), -1))], provenance="free:cycle(8)")
    cb.write_graph(C8, tmp_path / "c8.json")
    out = tmp_path / "oracle.json"
    code = main(
        ["--no-figures", "oracle", "--graph", str(tmp_path / "c8.json"),
         "--r", "1", "--maxlen", "10", "--out", str(out)]
    )
    assert code == 0
    blob = json.loads(out.read_text())
    assert blob["class_count"] == 3
    assert (tmp_path / "oracle.csv").exists()


def test_tower_compare_invariants_pipeline(tmp_path, capsys):
    n_path = tmp_path / "N.json"
    m_path = tmp_path / "M.json"
    assert main(["--no-figures", "tower", "congruence", "--family", "N", "--depth", "2",
                 "--out", str(n_path)]) == 0
    assert main(["--no-figures", "tower", "congruence", "--family", "M", "--depth", "2",
                 "--out", str(m_path)]) == 0
    cmp_path = tmp_path / "cmp.json"
    assert main(["compare", "--t1", str(n_path), "--t2", str(m_path),
                 "--out", str(cmp_path)]) == 0
    blob = json.loads(cmp_path.read_text())
    assert blob["verdict"] == "NotCoarselyEquivalent" and blob["revalidated"]

    inv_path = tmp_path / "inv.json"
    assert main(["--no-figures", "invariants", "--tower", str(n_path),
                 "--out", str(inv_path)]) == 0
    blob = json.loads(inv_path.read_text())
    assert blob["rank_gradient"] == ["1", "1"]


def test_tower_graph_files_roundtrip(tmp_path, capsys):
    out = tmp_path / "h.json"
    assert main(["--no-figures", "tower", "homology", "--n", "2", "--m", "2",
                 "--depth", "3", "--out", str(out), "--graphs"]) == 0
    blob = json.loads(out.read_text())
    files = [lv["graph_file"] for lv in blob["levels"]]
    assert all(f is not None for f in files)
    assert cb.read_graph(files[2]).num_vertices == 128


def test_exit_codes(tmp_path, capsys):
    # bad input: missing file
    assert main(["quotient", "voltage", "--input", str(tmp_path / "nope.json"),
                 "--m", "2", "--out", str(tmp_path / "x.json")]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["exit_code"] == 2

    # budget exceeded
    assert main(["--budget", "10", "quotient", "sl2", "--modulus", "64",
                 "--out", str(tmp_path / "y.json")]) == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "BudgetExceededError"

    # internal consistency: doctored tower fed to invariants
    tower_path = tmp_path / "t.json"
    assert main(["--no-figures", "tower", "homology", "--n", "2", "--m", "2",
                 "--depth", "2", "--out", str(tower_path)]) == 0
    blob = json.loads(tower_path.read_text())
    blob["levels"][1]["rank"] = {"coeff": 3, "base": 2, "exponent": 2, "offset": 1}
    tower_path.write_text(json.dumps(blob))
    capsys.readouterr()
    assert main(["--no-figures", "invariants", "--tower", str(tower_path),
                 "--out", str(tmp_path / "i.json")]) == 4


def test_budget_env_variable(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("COARSEBOX_BUDGET", "10")
    assert main(["quotient", "sl2", "--modulus", "64", "--out", str(tmp_path / "g.json")]) == 3
    monkeypatch.setenv("COARSEBOX_BUDGET", "20000")
    assert main(["quotient", "sl2", "--modulus", "64", "--out", str(tmp_path / "g.json")]) == 0


def test_paper_sections_write_artifacts(tmp_path, capsys):
    code = main(["--no-figures", "paper", "4.5", "--outdir", str(tmp_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out
    assert (tmp_path / "paper_4_5.json").exists()
    assert (tmp_path / "paper_4_5.csv").exists()


def test_figures_are_rendered(tmp_path, capsys):
    out = tmp_path / "N.json"
    assert main(["tower", "congruence", "--family", "N", "--depth", "2",
                 "--out", str(out)]) == 0
    assert (tmp_path / "N.png").stat().st_size > 0
