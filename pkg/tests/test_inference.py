import numpy as np
import pytest

from conftest import NETS_DIR, parse
from endpoints.inference import (
    auto_solver,
    load_document,
    run_comparison,
    run_inference,
    run_solver,
    validate_document,
)
from models.net_models import Evidence
from utils.bnet_format import BnetFormat
from utils.errors import LevelViolation, SolverInapplicable, TooLarge, UnknownNode
from utils.net_generators import NetGenerators
from utils.report_format import ReportFormat


def nets(name):
    return load_document(str(NETS_DIR / name))


# === solver selection ===
def test_auto_solver_follows_structure(pair_doc, chain_doc, diamond_doc):
    assert auto_solver(pair_doc.net, pair_doc.evidence) == "eigen"
    assert auto_solver(chain_doc.net, Evidence(assignments={"E": 0})) == "lambda-only"
    assert auto_solver(chain_doc.net, Evidence(assignments={"E": 0}), ["E"]) == "pearl"
    assert auto_solver(nets("polytree.bnet").net, Evidence()) == "pearl"
    assert auto_solver(diamond_doc.net, Evidence()) == "exact"
    # internal evidence is left to the oracle
    assert auto_solver(chain_doc.net, Evidence(assignments={"h": 0})) == "exact"
    # one observed shared leaf leaves a loopy net to the oracle
    assert auto_solver(pair_doc.net, pair_doc.evidence.without("E2")) == "exact"


def test_general_net_over_the_cap(diamond_doc, monkeypatch):
    monkeypatch.setenv("RECOGNET_SIZE_CAP", "8")
    with pytest.raises(TooLarge):
        run_inference(diamond_doc, "auto")


# === run_inference ===
def test_eigen_on_two_hypotheses():
    report = run_inference(nets("two_hypotheses.bnet"), "eigen")
    run = report.run("eigen")
    assert report.structure == "SharedLeafPair"
    assert run.beliefs["h1"] == pytest.approx([0.811, 0.190], abs=2e-3)
    assert sorted(run.beliefs["h2"]) == pytest.approx([0.345, 0.655], abs=2e-3)
    assert run.diagnostics["alpha.leaf_slice_eigenvalue.E1"] == pytest.approx(0.562, abs=1e-3)
    assert run.diagnostics["fixed_point_residual"] <= 1e-10
    assert run.diagnostics["message_cycle_gap"] <= 1e-8
    assert run.diagnostics["method_agreement"] <= 1e-10
    assert {c.node: c.status for c in run.expectations} == {"h1": "match", "h2": "order-mismatch"}
    assert any("only up to component order" in note for note in report.notes)


def test_exact_on_two_hypotheses():
    run = run_inference(nets("two_hypotheses.bnet"), "exact").run("exact")
    assert run.beliefs["h1"] == pytest.approx([0.8468, 0.1532], abs=1e-4)
    assert run.beliefs["h2"] == pytest.approx([0.7741, 0.2259], abs=1e-4)
    assert run.expectations == []


def test_completed_beliefs_match_exact_on_separable_pair():
    doc = nets("separable_pair.bnet")
    completed = run_inference(doc, "eigen-completed").run("eigen-completed")
    exact = run_inference(doc, "exact", ["h1", "h2"]).run("exact")
    for root in ("h1", "h2"):
        assert completed.beliefs[root] == pytest.approx(exact.beliefs[root], abs=1e-9)


def test_lambda_only_and_pearl_agree_on_trees(rng):
    for _ in range(10):
        net = NetGenerators.random_tree(rng, int(rng.integers(2, 8)))
        doc = BnetFormat.from_net(net, NetGenerators.leaf_evidence(rng, net))
        upward = run_solver(doc, "lambda-only")
        full = run_solver(doc, "pearl", list(upward.beliefs))
        root = next(iter(upward.beliefs))
        assert np.abs(np.subtract(upward.beliefs[root], full.beliefs[root])).max() <= 1e-12


def test_beliefs_are_distributions():
    for name in ("two_hypotheses.bnet", "polytree.bnet", "generalized_cylinder.bnet", "chain.bnet"):
        report = run_inference(nets(name), "auto")
        for belief in report.runs[0].beliefs.values():
            assert sum(belief) == pytest.approx(1.0, abs=1e-9)


def test_inapplicable_solvers_suggest_an_alternative(chain_doc, diamond_doc):
    with pytest.raises(SolverInapplicable) as e:
        run_inference(chain_doc, "eigen")
    assert "try --solver" in e.value.message
    with pytest.raises(SolverInapplicable) as e:
        run_inference(diamond_doc, "pearl")
    assert e.value.details["suggestion"] == "exact"
    with pytest.raises(SolverInapplicable):
        run_inference(nets("polytree.bnet"), "lambda-only")
    with pytest.raises(SolverInapplicable) as e:
        run_inference(chain_doc, "lambda-only", ["E"])
    assert e.value.details["suggestion"] == "pearl"
    assert "try --solver pearl" in e.value.message
    with pytest.raises(SolverInapplicable):
        run_inference(chain_doc, "simulated-annealing")


def test_unknown_query(chain_doc):
    with pytest.raises(UnknownNode):
        run_inference(chain_doc, "exact", ["ghost"])


# === run_comparison ===
def test_compare_eigen_with_exact():
    report = run_comparison(nets("two_hypotheses.bnet"), ["eigen", "exact"])
    rows = {(r.node, r.solver_a, r.solver_b): r.l1 for r in report.divergence}
    assert rows[("h1", "eigen", "exact")] == pytest.approx(0.072, abs=3e-3)
    assert rows[("h2", "eigen", "exact")] > 1e-3


def test_compare_pearl_with_exact_on_polytree():
    report = run_comparison(nets("polytree.bnet"), ["pearl", "exact"])
    assert report.divergence
    assert max(r.l1 for r in report.divergence) <= 1e-9


def test_compare_separable_completed_with_exact():
    report = run_comparison(nets("separable_pair.bnet"), ["eigen-completed", "exact"])
    assert [r.node for r in report.divergence] == ["h1", "h2"]
    assert max(r.l1 for r in report.divergence) <= 1e-9


def test_compare_needs_two_solvers(chain_doc):
    with pytest.raises(SolverInapplicable):
        run_comparison(chain_doc, ["exact"])


# === validation ===
def test_validate_document():
    report = validate_document(str(NETS_DIR / "two_hypotheses.bnet"))
    assert report.valid and report.structure == "SharedLeafPair"
    assert (report.nodes, report.arcs) == (4, 4)
    broken = validate_document(text="node a 2\ncpt a\nrow - : 0.5 0.6\n")
    assert not broken.valid
    assert broken.error.startswith("error=CPT_MISMATCH")


def test_levels_are_checked_on_load():
    text = (
        "node a 2\nnode b 2\narc a b\nlevel a 3\nlevel b 1\n"
        "cpt a\nrow - : 0.5 0.5\ncpt b\nrow 0 : 0.5 0.5\nrow 1 : 0.5 0.5\n"
    )
    with pytest.raises(LevelViolation):
        load_document(text=text)
    assert parse(text).levels == {"a": 3, "b": 1}


# === report formats ===
def test_records_are_stable():
    report = run_inference(nets("two_hypotheses.bnet"), "eigen")
    records = ReportFormat.to_records(report)
    lines = records.splitlines()
    assert lines[0] == "recognet_version=0.1.0"
    assert "structure=SharedLeafPair" in lines
    assert "expect.eigen.h2=order-mismatch" in lines
    assert any(line.startswith("belief.eigen.h1=0.81") for line in lines)
    assert ReportFormat.to_records(run_inference(nets("two_hypotheses.bnet"), "eigen")) == records


def test_records_carry_divergence():
    report = run_comparison(nets("polytree.bnet"), ["pearl", "exact"], ["c"])
    lines = ReportFormat.to_records(report).splitlines()
    assert [line.split("=")[0] for line in lines if line.startswith("divergence.")] == ["divergence.pearl.exact.c"]


def test_text_report():
    text = ReportFormat.to_text(run_inference(nets("chain.bnet"), "auto"))
    assert "structure: Tree" in text
    assert "lambda-only beliefs" in text
    assert "(0.8182, 0.1818)" in text
