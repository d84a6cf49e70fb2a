import numpy as np
import pytest

from models.decomposition_models import DecompositionSpec, LinkSpec, PartSpec, SharedChildSpec
from models.net_models import Cpt, Evidence, NodeDecl, StructureClass
from services.net_core_service import net_core_service
from services.oracle_service import oracle_service
from services.pearl_service import pearl_service
from services.vision_model_service import vision_model_service
from utils.bnet_format import BnetFormat
from utils.errors import BadEpsilon, CptMismatch, LevelViolation, UnknownNode


def shared_pair_net(cpt):
    nodes = [NodeDecl(id="h1", cardinality=2), NodeDecl(id="h2", cardinality=2), NodeDecl(id="E", cardinality=2)]
    priors = [Cpt(node="h1", table=((0.5, 0.5),)), Cpt(node="h2", table=((0.5, 0.5),))]
    return net_core_service.build_net(nodes, [("h1", "E"), ("h2", "E")], priors + [cpt])


def pair_posterior(net, state):
    """Posterior joint over (h1, h2) given E = state."""
    joint = oracle_service.joint_enumeration(net)
    conditioned = oracle_service.condition(joint, Evidence(assignments={"E": state}))
    pair = conditioned.sum(axis=joint.axis("E"))
    return pair / pair.sum()


# === evidence CPTs ===
def test_exclusion_slice():
    cpt = vision_model_service.exclusion_evidence_cpt(2, 2, 0.05)
    np.testing.assert_allclose(cpt.tensor([2, 2])[:, :, 0], [[0.05, 0.95], [0.95, 0.05]])


def test_coincidence_slice():
    cpt = vision_model_service.coincidence_evidence_cpt(2, 2, 0.05)
    np.testing.assert_allclose(cpt.tensor([2, 2])[:, :, 0], [[0.95, 0.05], [0.05, 0.05]])


def test_larger_hypotheses_use_state_zero_as_present():
    cpt = vision_model_service.exclusion_evidence_cpt(3, 2, 0.1)
    present = cpt.tensor([3, 2])[:, :, 0]
    np.testing.assert_allclose(present, [[0.1, 0.9], [0.9, 0.1], [0.9, 0.1]])


@pytest.mark.parametrize("epsilon", [0.5, 0.0, -0.1, 0.7])
def test_bad_epsilon(epsilon):
    with pytest.raises(BadEpsilon):
        vision_model_service.exclusion_evidence_cpt(2, 2, epsilon)
    with pytest.raises(BadEpsilon):
        vision_model_service.coincidence_evidence_cpt(2, 2, epsilon)


def test_default_epsilon_from_settings(monkeypatch):
    monkeypatch.setenv("RECOGNET_DEFAULT_EPSILON", "0.1")
    cpt = vision_model_service.coincidence_evidence_cpt(2, 2)
    assert cpt.table[0] == pytest.approx((0.9, 0.1))


def test_exclusion_makes_hypotheses_compete():
    net = shared_pair_net(vision_model_service.exclusion_evidence_cpt(2, 2, 0.05, node="E"))
    pair = pair_posterior(net, 0)
    assert pair[0, 1] + pair[1, 0] == pytest.approx(0.95, abs=1e-9)
    assert pair[0, 0] < pair[0, :].sum() * pair[:, 0].sum()
    assert vision_model_service.dependence_gap(pair) < 0.0


def test_coincidence_makes_hypotheses_cooperate():
    net = shared_pair_net(vision_model_service.coincidence_evidence_cpt(2, 2, 0.05, node="E"))
    present = pair_posterior(net, 0)
    assert present[0, 0] == pytest.approx(0.8636, abs=1e-4)
    assert vision_model_service.dependence_gap(present) > 0.0
    absent = pair_posterior(net, 1)
    assert absent[0, 0] == pytest.approx(0.0172, abs=1e-4)


# === compile_decomposition ===
def test_generalized_cylinder():
    spec = vision_model_service.generalized_cylinder()
    net = vision_model_service.compile_decomposition(spec)
    assert net_core_service.classify_structure(net) == StructureClass.GENERAL
    assert net.parents("limb") == ["face", "axis"]

    without_limb = spec.model_copy(
        update={"parts": tuple(p for p in spec.parts if p.id != "limb"), "shared_children": ()}
    )
    tree = vision_model_service.compile_decomposition(without_limb)
    assert net_core_service.classify_structure(tree) == StructureClass.TREE
    assert net_core_service.roots(tree) == ["cylinder"]


def test_single_object_single_edge():
    spec = DecompositionSpec(
        parts=(PartSpec(id="obj", level="object"), PartSpec(id="edge", level="edge")),
        links=(LinkSpec(parent="obj", child="edge"),),
    )
    net = vision_model_service.compile_decomposition(spec)
    assert net.node_ids == ["obj", "edge"]
    assert net_core_service.classify_structure(net) == StructureClass.TREE
    np.testing.assert_allclose(net.cpt("edge").as_array(), [[0.9, 0.1], [0.05, 0.95]])


def test_two_objects_sharing_a_leaf():
    spec = DecompositionSpec(
        parts=(
            PartSpec(id="man", level="object"),
            PartSpec(id="tires", level="object"),
            PartSpec(id="blob", level="region"),
        ),
        shared_children=(
            SharedChildSpec(child="blob", parents=("man", "tires"), relation="exclusion", meaning="same-location exclusion"),
        ),
    )
    net = vision_model_service.compile_decomposition(spec)
    assert net_core_service.classify_structure(net) == StructureClass.SHARED_LEAF_PAIR
    assert net.node("blob").display_name == "same-location exclusion"


def test_tree_decompositions_propagate():
    spec = vision_model_service.generalized_cylinder()
    tree = vision_model_service.compile_decomposition(
        spec.model_copy(update={"parts": spec.parts[:-1], "shared_children": ()})
    )
    evidence = Evidence(assignments={"face_edge": 0, "axis_edge": 1})
    beliefs = pearl_service.propagate(tree, evidence).beliefs
    exact = oracle_service.posterior(tree, evidence, "cylinder")
    assert beliefs["cylinder"] == pytest.approx(exact, abs=1e-9)


def test_upward_arc_is_a_level_violation():
    spec = DecompositionSpec(
        parts=(PartSpec(id="obj", level="object"), PartSpec(id="edge", level="edge")),
        links=(LinkSpec(parent="edge", child="obj"),),
    )
    with pytest.raises(LevelViolation):
        vision_model_service.compile_decomposition(spec)
    with pytest.raises(LevelViolation):
        vision_model_service.compile_decomposition(
            DecompositionSpec(parts=(PartSpec(id="obj", level="galaxy"),))
        )


def test_compile_errors():
    parts = (
        PartSpec(id="a", level="object"),
        PartSpec(id="b", level="object"),
        PartSpec(id="e", level="edge"),
    )
    with pytest.raises(CptMismatch):
        vision_model_service.compile_decomposition(
            DecompositionSpec(parts=parts, links=(LinkSpec(parent="a", child="e"), LinkSpec(parent="b", child="e")))
        )
    with pytest.raises(CptMismatch):
        vision_model_service.compile_decomposition(
            DecompositionSpec(parts=parts, shared_children=(SharedChildSpec(child="e", parents=("a", "b")),))
        )
    with pytest.raises(UnknownNode):
        vision_model_service.compile_decomposition(
            DecompositionSpec(parts=parts, links=(LinkSpec(parent="ghost", child="e"),))
        )


# === level statements ===
def test_document_levels_round_trip(nets_dir):
    doc = BnetFormat.parse_file(str(nets_dir / "generalized_cylinder.bnet"))
    vision_model_service.check_levels(doc)
    spec = vision_model_service.spec_from_document(doc)
    assert spec.levels == ("volume-primitive", "surface", "edge")
    rebuilt = vision_model_service.compile_decomposition(spec)
    assert set(rebuilt.arcs) == set(doc.net.arcs)
    before = oracle_service.joint_enumeration(doc.net).flat()
    after = oracle_service.joint_enumeration(rebuilt).flat()
    assert np.abs(before - after).max() <= 1e-12


def test_document_level_violation():
    text = (
        "node a 2\nnode b 2\narc a b\nlevel a 3\nlevel b 1\n"
        "cpt a\nrow - : 0.5 0.5\ncpt b\nrow 0 : 0.5 0.5\nrow 1 : 0.5 0.5\n"
    )
    doc = BnetFormat.parse(text)
    with pytest.raises(LevelViolation):
        vision_model_service.check_levels(doc)


def test_spec_from_document_needs_every_level(chain_doc):
    with pytest.raises(LevelViolation):
        vision_model_service.spec_from_document(chain_doc)
