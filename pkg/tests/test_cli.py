import csv
import json

import pytest

from structrev.cli import EXIT_ERROR, EXIT_NEGATIVE, EXIT_OK, main
from structrev.model import load_model


@pytest.fixture
def run(capsys):
    def _run(*argv):
        code = main([str(a) for a in argv])
        out = capsys.readouterr()
        return code, out.out, out.err
    return _run


@pytest.fixture
def extra_path(preset_dir):
    return preset_dir / "jackson-extra-5.10.json"


@pytest.fixture
def product_path(preset_dir):
    return preset_dir / "appendixD-product-nonreversible.json"


class TestValidateAndCheck:
    def test_validate(self, run, extra_path):
        code, out, err = run("validate", extra_path)
        assert code == EXIT_OK
        assert json.loads(out)["ok"] is True
        assert "valid" in err

    def test_validate_bad_sum(self, run, tmp_path, extra_path):
        doc = json.loads(extra_path.read_text())
        doc["p_plus"]["0,0"] += 0.1
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        code, out, _ = run("validate", path)
        assert code == EXIT_NEGATIVE
        assert json.loads(out)["ok"] is False

    def test_check_ratios(self, run, product_path):
        code, out, _ = run("check", product_path)
        assert code == EXIT_OK
        ratios = json.loads(out)["a1"]["details"]["ratios"]
        assert [ratios[k] for k in ("-1", "0", "1")] == pytest.approx([65.5165, 43.4732, 12.7203], rel=1e-3)


class TestSolve:
    def test_extra(self, run, extra_path):
        code, out, err = run("solve", extra_path)
        doc = json.loads(out)
        assert code == EXIT_OK
        assert doc["verdict"] == "StructureReversible"
        assert doc["product_form"] is False
        assert 1 / doc["solution"]["eta1"] == pytest.approx(2.2105, abs=2e-3)
        assert "eta" in err

    def test_product_instance(self, run, product_path):
        code, out, _ = run("solve", product_path)
        doc = json.loads(out)
        assert code == EXIT_NEGATIVE
        assert doc["verdict"] == "NotStructureReversible"
        assert doc["conditions"]["a1"]["status"] == "fail"

    def test_singular(self, run, preset_dir):
        code, out, _ = run("solve", preset_dir / "singular-A-demo.json")
        assert code == EXIT_OK
        assert json.loads(out)["verdict"] == "Singular"

    def test_loose_tolerance_flag(self, run, extra_path):
        code, out, _ = run("solve", extra_path, "--tol", "1e-3")
        assert code == EXIT_OK and json.loads(out)["verdict"] == "StructureReversible"


class TestOutputs:
    def test_reverse(self, run, extra_path, tmp_path):
        path = tmp_path / "rev.json"
        code, out, _ = run("reverse", extra_path, "-o", path)
        assert code == EXIT_OK
        assert json.loads(out)["homogeneity_residual"] <= 1e-9
        assert load_model(path).pplus.total() == pytest.approx(1.0, abs=1e-15)

    def test_reverse_without_closed_form(self, run, product_path, tmp_path):
        code, out, _ = run("reverse", product_path, "-o", tmp_path / "rev.json")
        assert code == EXIT_ERROR
        assert json.loads(out)["error"] == "CommandError"

    def test_verify(self, run, extra_path):
        code, out, _ = run("verify", extra_path, "--grid", 60)
        doc = json.loads(out)
        assert code == EXIT_OK
        assert doc["oracle_tv"] <= 1e-3
        assert doc["rates_source"] == "closed form"

    def test_verify_given_rates(self, run, product_path):
        code, out, _ = run("verify", product_path, "--eta", 0.3, 0.2)
        doc = json.loads(out)
        assert code == EXIT_OK
        assert doc["balance_residual"] <= 1e-8 and doc["oracle_tv"] <= 1e-3

    def test_verify_simulation_deterministic(self, run, extra_path):
        args = ("verify", extra_path, "--grid", 30, "--steps", 200_000, "--seed", 9)
        first = json.loads(run(*args)[1])
        second = json.loads(run(*args)[1])
        assert first["simulation_tv"] == second["simulation_tv"]

    def test_curves(self, run, extra_path, tmp_path):
        code, out, _ = run("curves", extra_path, "-o", tmp_path, "--points", 50)
        assert code == EXIT_OK
        written = json.loads(out)["curves"]
        assert set(written) == {"Interior", "Horizontal", "Vertical", "Origin"}
        with open(written["Interior"]["path"]) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["face", "z1", "z2"]
        assert any(float(z1) == 1.0 and abs(float(z2) - 1.0) < 1e-12 for _, z1, z2 in rows[1:])

    def test_table(self, run, extra_path):
        code, out, _ = run("table", extra_path, "--nmax", 3)
        rows = list(csv.reader(out.splitlines()))
        assert code == EXIT_OK
        assert rows[0] == ["n1", "n2", "probability"]
        assert len(rows) == 1 + 16
        assert float(rows[1][2]) == pytest.approx(0.0890586, abs=1e-6)

    def test_preset(self, run, preset_dir, tmp_path):
        path = tmp_path / "p.json"
        assert run("preset", "singular-A-demo", "-o", path)[0] == EXIT_OK
        assert path.read_bytes() == (preset_dir / "singular-A-demo.json").read_bytes()

    def test_preset_stdout(self, run):
        code, out, _ = run("preset", "jackson-standard")
        assert code == EXIT_OK and json.loads(out)["label"] == "jackson-standard"


class TestErrors:
    def test_missing_file(self, run, tmp_path):
        code, out, err = run("solve", tmp_path / "nope.json")
        assert code == EXIT_ERROR
        assert "error" in json.loads(out)

    def test_malformed_document(self, run, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        code, out, _ = run("check", path)
        assert code == EXIT_ERROR
        assert json.loads(out)["error"] == "ModelError"

    def test_unknown_preset(self):
        with pytest.raises(SystemExit) as exc:
            main(["preset", "unknown"])
        assert exc.value.code == 2
