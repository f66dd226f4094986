import json
import os
from pathlib import Path

import jsonschema
import numpy as np
import pytest

import ancreg

SOURCE = Path(os.environ.get("ANCREG_SOURCE_DIR", Path(__file__).resolve().parents[2]))
SCHEMAS = SOURCE / "schemas"


def validate(path, schema):
    document = json.loads(Path(path).read_text())
    jsonschema.validate(document, json.loads((SCHEMAS / schema).read_text()))
    return document


@pytest.fixture(scope="module")
def reference():
    return ancreg.builtin_spec("reference")


def test_spec_round_trip(reference):
    assert reference.p == 6
    assert reference.ancestors()[3] == [0, 1, 2]
    again = ancreg.parse_sem_spec(reference.to_text())
    assert again == reference
    assert reference.noise[5][0] == "gaussian"


def test_spec_errors():
    with pytest.raises(ancreg.ParseError):
        ancreg.parse_sem_spec("p = 2\n[edges]\n1 -> 2 : x\n")
    cyclic = (SOURCE / "configs" / "cyclic_pair.sem").read_text()
    with pytest.raises(ancreg.CycleError):
        ancreg.parse_sem_spec(cyclic)
    assert ancreg.parse_sem_spec(cyclic, require_dag=False).p == 2


def test_simulate_is_seeded(reference):
    a = ancreg.simulate(reference, 500, 3)
    b = ancreg.simulate(reference, 500, 3)
    c = ancreg.simulate(reference, 500, 4)
    assert a.shape == (500, 6)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_ancestor_scan_finds_ancestors(reference):
    x = ancreg.simulate(reference, 100_000, 5)
    scan = ancreg.ancestor_scan(x, 3)
    assert np.isnan(scan["z"][3])
    corrected = ancreg.holm([scan["p_raw"][k] for k in (0, 1, 2, 4, 5)])
    assert [p < 0.05 for p in corrected] == [True, True, True, False, False]


def test_ancestor_scan_matches_numpy(reference):
    x = ancreg.simulate(reference, 2000, 9)
    xc = x - x.mean(axis=0)
    y = xc[:, 3] ** 3
    y = y - y.mean()
    beta, *_ = np.linalg.lstsq(xc, y, rcond=None)
    resid = y - xc @ beta
    sigma_sq = resid @ resid / (x.shape[0] - x.shape[1])
    se = np.sqrt(np.diag(np.linalg.inv(xc.T @ xc)) * sigma_sq)
    scan = ancreg.ancestor_scan(x, 3)
    keep = [0, 1, 2, 4, 5]
    np.testing.assert_allclose(scan["z"][keep], (beta / se)[keep], rtol=1e-8)


def test_identity_is_degenerate(reference):
    x = ancreg.simulate(reference, 200, 1)
    with pytest.raises(ancreg.DegenerateFit):
        ancreg.ancestor_scan(x, 3, f="identity")
    with pytest.raises(ancreg.ShapeError):
        ancreg.ancestor_scan(x[:5], 3)


def test_holm_reference_values():
    assert ancreg.holm([0.01, 0.04, 0.03]) == pytest.approx([0.03, 0.06, 0.06])
    assert ancreg.holm([0.6, 0.7], cap=False) == pytest.approx([1.2, 1.2])
    assert ancreg.holm([0.6, 0.7]) == pytest.approx([1.0, 1.0])


def test_two_variable_example():
    p = np.array([[1.0, 1e-3], [1e-6, 1.0]])
    for alpha in (0.002, 0.05, 1.0):
        fit = ancreg.find_structure(p, alpha)
        assert fit["adjacency"].tolist() == [[False, False], [True, False]]
        assert fit["alpha_hat"] == 1e-3


def test_build_recursive_chain():
    a = np.zeros((3, 3), dtype=bool)
    a[1, 0] = a[2, 1] = True
    closed = ancreg.build_recursive(a)
    assert closed[2, 0]


def test_detect_graph_and_parents(reference):
    x = ancreg.simulate(reference, 50_000, 11)
    result = ancreg.detect_graph(x)
    assert result.ancestors[5] == [0, 1, 2, 3, 4]
    assert not result.tightened
    assert ancreg.model_check_pvalue(result) == 1.0
    parents = ancreg.parent_tests(x, 3, result.ancestors[3])
    significant = [a for a, p in zip(parents["ancestors"], parents["p_value"]) if p < 0.05]
    assert significant == [1, 2]
    with pytest.raises(ancreg.EmptyAncestors):
        ancreg.parent_tests(x, 0, [])
    uncapped = ancreg.detect_graph(x, cap=False)
    with pytest.raises(ancreg.InvalidInput):
        ancreg.model_check_pvalue(uncapped)


def test_cyclic_data_tightens():
    spec = ancreg.builtin_spec("cyclic_pair")
    x = ancreg.simulate_equilibrium(spec, 10_000, 1)
    result = ancreg.detect_graph(x)
    assert result.tightened
    assert ancreg.model_check_pvalue(result) < 0.05


def test_cli_reports_are_schema_valid(tmp_path):
    data = tmp_path / "envs.csv"
    code, _, err = ancreg.run_cli(["simulate", "builtin:reference", "-n", "4000", "--environments", "8",
                                   "--out", str(data)])
    assert code == 0, err
    validate(str(data) + ".manifest.json", "run_manifest.schema.json")

    out = tmp_path / "graph"
    code, text, err = ancreg.run_cli(["graph", str(data), "--env-column", "environment", "--out-dir", str(out)])
    assert code == 0, err
    assert "alpha_hat ranges from" in text
    for e in range(1, 9):
        doc = validate(out / f"env{e}.graph.json", "graph_result.schema.json")
        assert doc["environment"] == f"env{e}"
    summary = validate(out / "summary.json", "environment_summary.schema.json")
    assert len(summary["environments"]) == 8
    validate(out / "manifest.json", "run_manifest.schema.json")

    single = tmp_path / "single.csv"
    assert ancreg.run_cli(["simulate", "builtin:reference", "-n", "3000", "--out", str(single)])[0] == 0
    anc = tmp_path / "anc"
    assert ancreg.run_cli(["ancestors", str(single), "--target", "X4", "--out-dir", str(anc)])[0] == 0
    validate(anc / "ancestors.json", "ancestor_report.schema.json")


def test_cli_study_outputs_are_schema_valid(tmp_path):
    config = tmp_path / "small.study"
    config.write_text(
        "[study]\nkind = graph\nsample_sizes = 100, 300\nruns = 3\n"
        "[scenario one_gaussian]\nbuiltin = reference\n"
    )
    code, _, err = ancreg.run_cli(["study", str(config), "--out-dir", str(tmp_path)])
    assert code == 0, err
    validate(tmp_path / "one_gaussian.summary.json", "study_summary.schema.json")
    header = (tmp_path / "one_gaussian.curves.csv").read_text().splitlines()[0]
    assert header == "scenario,n,alpha,fwer,power"


def test_cli_exit_codes(tmp_path):
    assert ancreg.run_cli(["simulate", "builtin:reference", "-n", "0"])[0] == 2
    code, _, err = ancreg.run_cli(["simulate", str(SOURCE / "configs" / "cyclic_pair.sem"), "-n", "10",
                                   "--out-dir", str(tmp_path)])
    assert code == 3
    assert "cycl" in err
