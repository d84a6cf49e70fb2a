import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import PAIR_SLICE, parse
from models.net_models import Cpt, Evidence
from services.net_core_service import net_core_service
from services.oracle_service import oracle_service
from services.pearl_service import pearl_service
from utils.errors import (
    DimensionMismatch,
    EvidenceOnInternalNode,
    InconsistentEvidence,
    NotInstantiated,
    NotPolytree,
    NotTree,
    UnknownNode,
    WrongArity,
)
from utils.net_generators import NetGenerators

weights = st.lists(st.floats(min_value=0.01, max_value=1.0), min_size=2, max_size=2)


def slice_cpt(present: np.ndarray) -> Cpt:
    rows = present.reshape(-1)
    return Cpt(node="E", parents=("h1", "h2"), table=tuple((float(p), float(1.0 - p)) for p in rows))


# === root_pi_message ===
def test_root_pi_message():
    assert pearl_service.root_pi_message([0.5, 0.5], {}) == pytest.approx([0.5, 0.5])
    assert pearl_service.root_pi_message([0.5, 0.5], {"E2": [0.7, 0.3]}) == pytest.approx([0.7, 0.3])
    assert pearl_service.root_pi_message([0.8, 0.2], {"E2": [0.5, 0.5]}) == pytest.approx([0.8, 0.2])
    # the receiving child's own lambda is left out
    message = pearl_service.root_pi_message([0.5, 0.5], {"E1": [0.9, 0.1], "E2": [0.7, 0.3]}, excluding="E1")
    assert message == pytest.approx([0.7, 0.3])


def test_root_pi_message_dimensions():
    with pytest.raises(DimensionMismatch):
        pearl_service.root_pi_message([0.5, 0.5], {"E": [0.2, 0.3, 0.5]})


# === leaf_lambda_message ===
def test_leaf_lambda_on_pair_slice():
    cpt = slice_cpt(PAIR_SLICE)
    assert pearl_service.leaf_lambda_message(cpt, 0, [0.5, 0.5], "h1") == pytest.approx([0.7, 0.3])
    # receiving h2: the slice is transposed
    assert pearl_service.leaf_lambda_message(cpt, 0, [0.5, 0.5], "h2") == pytest.approx([0.6, 0.4])


@given(weights, weights)
@settings(max_examples=200)
def test_separable_leaf_ignores_incoming_pi(pi_a, pi_b):
    cpt = slice_cpt(np.outer([0.9, 0.1], [0.5, 0.8]))
    first = pearl_service.leaf_lambda_message(cpt, 0, pi_a, "h1")
    second = pearl_service.leaf_lambda_message(cpt, 0, pi_b, "h1")
    assert first == pytest.approx([0.9, 0.1], abs=1e-12)
    assert np.abs(first - second).max() <= 1e-12


def test_uniform_slice_gives_uniform_lambda():
    cpt = slice_cpt(np.full((2, 2), 0.5))
    assert pearl_service.leaf_lambda_message(cpt, 1, [0.9, 0.1], "h2") == pytest.approx([0.5, 0.5])


def test_leaf_lambda_errors(chain_doc):
    with pytest.raises(WrongArity):
        pearl_service.leaf_lambda_message(chain_doc.net.cpt("E"), 0, [0.5, 0.5], "h")
    cpt = slice_cpt(PAIR_SLICE)
    with pytest.raises(NotInstantiated):
        pearl_service.leaf_lambda_message(cpt, None, [0.5, 0.5], "h1")
    with pytest.raises(UnknownNode):
        pearl_service.leaf_lambda_message(cpt, 0, [0.5, 0.5], "h3")
    with pytest.raises(DimensionMismatch):
        pearl_service.leaf_lambda_message(cpt, 0, [0.2, 0.3, 0.5], "h1")


# === propagate ===
def test_propagate_chain(chain_doc):
    state = pearl_service.propagate(chain_doc.net, Evidence(assignments={"E": 0}))
    assert state.beliefs["h"] == pytest.approx([0.45 / 0.55, 0.10 / 0.55], abs=1e-9)
    assert state.beliefs["E"] == pytest.approx([1.0, 0.0])


def test_no_evidence_gives_pre_posteriors(nets_dir):
    net = parse((nets_dir / "polytree.bnet").read_text()).net
    beliefs = pearl_service.propagate(net, Evidence()).beliefs
    for node_id in net.node_ids:
        assert beliefs[node_id] == pytest.approx(oracle_service.pre_posterior(net, node_id), abs=1e-12)


def test_propagate_polytree_file(nets_dir):
    doc = parse((nets_dir / "polytree.bnet").read_text())
    beliefs = pearl_service.propagate(doc.net, doc.evidence).beliefs
    exact = oracle_service.posteriors(doc.net, doc.evidence, doc.net.node_ids)
    for node_id in doc.net.node_ids:
        assert beliefs[node_id] == pytest.approx(exact[node_id], abs=1e-9)


def test_messages_are_normalized(nets_dir):
    doc = parse((nets_dir / "polytree.bnet").read_text())
    state = pearl_service.propagate(doc.net, doc.evidence)
    # every skeleton edge carries one message each way
    assert len(state.schedule) == 2 * len(doc.net.arcs)
    for vector in [*state.pi.values(), *state.lam.values(), *state.beliefs.values()]:
        assert vector.sum() == pytest.approx(1.0, abs=1e-9)
        assert np.all(vector >= 0.0)


def test_propagate_rejects_loops_and_internal_evidence(diamond_doc, chain_doc):
    with pytest.raises(NotPolytree):
        pearl_service.propagate(diamond_doc.net, Evidence())
    with pytest.raises(EvidenceOnInternalNode):
        pearl_service.propagate(chain_doc.net, Evidence(assignments={"h": 0}))


def test_propagate_inconsistent_evidence():
    doc = parse("node h 2\nnode E 2\narc h E\ncpt h\nrow - : 0.5 0.5\ncpt E\nrow 0 : 1.0 0.0\nrow 1 : 1.0 0.0\n")
    with pytest.raises(InconsistentEvidence):
        pearl_service.propagate(doc.net, Evidence(assignments={"E": 1}))


def test_propagate_matches_oracle_on_random_polytrees(rng):
    worst = 0.0
    for _ in range(200):
        net = NetGenerators.random_polytree(rng, int(rng.integers(2, 11)), max_card=4)
        evidence = NetGenerators.leaf_evidence(rng, net)
        beliefs = pearl_service.propagate(net, evidence).beliefs
        exact = oracle_service.posteriors(net, evidence, net.node_ids)
        for node_id in net.node_ids:
            worst = max(worst, float(np.abs(beliefs[node_id] - exact[node_id]).max()))
    assert worst <= 1e-9


def test_messages_positive_with_positive_cpts(rng):
    net = NetGenerators.random_polytree(rng, 8)
    state = pearl_service.propagate(net, NetGenerators.leaf_evidence(rng, net))
    for vector in [*state.pi.values(), *state.lam.values()]:
        assert np.all(vector > 0.0)


# === lambda_only_update ===
def test_lambda_only_chain(chain_doc):
    root = pearl_service.lambda_only_update(chain_doc.net, Evidence(assignments={"E": 0}), "h")
    assert root == pytest.approx([0.8182, 0.1818], abs=1e-4)
    assert pearl_service.lambda_only_update(chain_doc.net, Evidence(), "h") == pytest.approx([0.5, 0.5])


def test_lambda_only_matches_propagation_on_random_trees(rng):
    for _ in range(100):
        net = NetGenerators.random_tree(rng, int(rng.integers(2, 11)), max_card=4)
        evidence = NetGenerators.leaf_evidence(rng, net)
        root = net_core_service.roots(net)[0]
        upward = pearl_service.lambda_only_update(net, evidence, root)
        full = pearl_service.propagate(net, evidence).beliefs[root]
        assert np.abs(upward - full).max() <= 1e-12


def test_lambda_only_errors(chain_doc, nets_dir):
    polytree = parse((nets_dir / "polytree.bnet").read_text())
    with pytest.raises(NotTree):
        pearl_service.lambda_only_update(polytree.net, Evidence(), "a")
    with pytest.raises(NotTree):
        pearl_service.lambda_only_update(chain_doc.net, Evidence(), "E")
    with pytest.raises(EvidenceOnInternalNode):
        pearl_service.lambda_only_update(chain_doc.net, Evidence(assignments={"h": 1}), "h")
    with pytest.raises(UnknownNode):
        pearl_service.lambda_only_update(chain_doc.net, Evidence(), "ghost")
