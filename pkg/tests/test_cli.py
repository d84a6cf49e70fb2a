from click.testing import CliRunner

from conftest import DIAMOND_BNET, NETS_DIR
from recognet import recognet

PAIR = str(NETS_DIR / "two_hypotheses.bnet")


def invoke(*args):
    return CliRunner().invoke(recognet, list(args))


def test_validate():
    result = invoke("validate", PAIR)
    assert result.exit_code == 0
    assert "valid structure=SharedLeafPair" in result.output


def test_validate_rejects_bad_rows(tmp_path):
    path = tmp_path / "bad.bnet"
    path.write_text("node a 2\ncpt a\nrow - : 0.5 0.6\n")
    result = invoke("validate", str(path))
    assert result.exit_code == 1
    assert "error=CPT_MISMATCH" in result.output


def test_validate_rejects_cycles(tmp_path):
    path = tmp_path / "cycle.bnet"
    path.write_text(
        "node a 2\nnode b 2\narc a b\narc b a\n"
        "cpt a\nrow 0 : 0.5 0.5\nrow 1 : 0.5 0.5\ncpt b\nrow 0 : 0.5 0.5\nrow 1 : 0.5 0.5\n"
    )
    result = invoke("validate", str(path))
    assert result.exit_code == 1
    assert "error=CYCLE_DETECTED" in result.output


def test_classify():
    assert invoke("classify", str(NETS_DIR / "chain.bnet")).output.strip() == "Tree"
    assert invoke("classify", str(NETS_DIR / "polytree.bnet")).output.strip() == "Polytree"
    assert invoke("classify", str(NETS_DIR / "generalized_cylinder.bnet")).output.strip() == "General"


def test_infer_records():
    result = invoke("infer", PAIR, "--solver", "eigen", "--format", "records")
    assert result.exit_code == 0
    lines = result.output.splitlines()
    assert lines[0] == "recognet_version=0.1.0"
    assert any(line.startswith("belief.eigen.h1=") for line in lines)
    assert "expect.eigen.h1=match" in lines


def test_infer_text_with_query():
    result = invoke("infer", str(NETS_DIR / "polytree.bnet"), "-q", "c", "-q", "a")
    assert result.exit_code == 0
    assert "pearl beliefs" in result.output


def test_compare():
    result = invoke("compare", PAIR, "--solvers", "eigen,exact", "--format", "records")
    assert result.exit_code == 0
    assert any(line.startswith("divergence.eigen.exact.h1=") for line in result.output.splitlines())


def test_inapplicable_solver_exits_one():
    result = invoke("infer", str(NETS_DIR / "chain.bnet"), "--solver", "eigen")
    assert result.exit_code == 1
    assert "error=SOLVER_INAPPLICABLE" in result.output
    assert "try --solver lambda-only" in result.output


def test_size_cap_from_environment(tmp_path, monkeypatch):
    path = tmp_path / "diamond.bnet"
    path.write_text(DIAMOND_BNET)
    monkeypatch.setenv("RECOGNET_SIZE_CAP", "8")
    result = invoke("infer", str(path), "--solver", "exact")
    assert result.exit_code == 1
    assert "error=TOO_LARGE" in result.output


def test_missing_file(tmp_path):
    result = invoke("validate", str(tmp_path / "missing.bnet"))
    assert result.exit_code == 1
    assert "error=PARSE_ERROR" in result.output


def test_empty_net_is_a_domain_error(tmp_path):
    path = tmp_path / "empty.bnet"
    path.write_text("# no nodes\n")
    result = invoke("validate", str(path))
    assert result.exit_code == 1
    assert result.output.strip() == "error=INVALID_NODE message=net declares no nodes"
