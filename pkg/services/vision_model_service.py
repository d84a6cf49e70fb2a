from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from models.decomposition_models import (
    DEFAULT_LEVELS,
    DecompositionSpec,
    LinkSpec,
    PartSpec,
    SharedChildSpec,
)
from models.net_models import BayesNet, Cpt, NodeDecl
from services.net_core_service import net_core_service
from utils.bnet_format import BnetDocument
from utils.config_reader import get_solver_settings
from utils.errors import BadEpsilon, CptMismatch, InvalidNode, LevelViolation, UnknownNode

PRESENT = 0


class VisionModelService:
    """Builds recognition nets from decomposition hierarchies and shared evidence."""

    # === Shared evidence CPTs ===
    def exclusion_evidence_cpt(
        self,
        card1: int,
        card2: int,
        epsilon: Optional[float] = None,
        node: str = "E",
        parents: Tuple[str, str] = ("h1", "h2"),
    ) -> Cpt:
        """XOR-like: E present with 1 - epsilon when exactly one hypothesis is present."""
        return self._pairwise_cpt(card1, card2, epsilon, node, parents, lambda a, b: a != b)

    def coincidence_evidence_cpt(
        self,
        card1: int,
        card2: int,
        epsilon: Optional[float] = None,
        node: str = "E",
        parents: Tuple[str, str] = ("h1", "h2"),
    ) -> Cpt:
        """AND-like: E present with 1 - epsilon only when both hypotheses are present."""
        return self._pairwise_cpt(card1, card2, epsilon, node, parents, lambda a, b: a and b)

    def _pairwise_cpt(self, card1, card2, epsilon, node, parents, rule) -> Cpt:
        if epsilon is None:
            epsilon = get_solver_settings().default_epsilon
        if not 0.0 < epsilon < 0.5:
            raise BadEpsilon(f"epsilon must lie in (0, 0.5), got {epsilon}", {"epsilon": epsilon})
        if card1 < 2 or card2 < 2:
            raise InvalidNode(f"hypothesis cardinalities must be >= 2, got {card1} and {card2}")
        rows = []
        for i in range(card1):
            for j in range(card2):
                p = 1.0 - epsilon if rule(i == PRESENT, j == PRESENT) else epsilon
                rows.append((p, 1.0 - p))
        return Cpt(node=node, parents=tuple(parents), table=tuple(rows))

    # === Decomposition hierarchies ===
    def compile_decomposition(self, spec: DecompositionSpec) -> BayesNet:
        parts = {p.id: p for p in spec.parts}
        if len(parts) != len(spec.parts):
            raise InvalidNode("part ids must be unique")
        level_of = {}
        for part in spec.parts:
            if part.level not in spec.levels:
                raise LevelViolation(f"part '{part.id}' has unknown level '{part.level}'", {"node": part.id})
            level_of[part.id] = spec.levels.index(part.level)

        link_of: Dict[str, LinkSpec] = {}
        shared_of: Dict[str, SharedChildSpec] = {}
        for link in spec.links:
            for end in (link.parent, link.child):
                if end not in parts:
                    raise UnknownNode(f"link {link.parent} -> {link.child} names unknown part '{end}'", {"node": end})
            if link.child in link_of:
                raise CptMismatch(
                    f"'{link.child}' has several parents; list it under shared_children",
                    {"node": link.child},
                )
            link_of[link.child] = link
        for shared in spec.shared_children:
            for end in (shared.child, *shared.parents):
                if end not in parts:
                    raise UnknownNode(f"shared child '{shared.child}' names unknown part '{end}'", {"node": end})
            if shared.child in link_of or shared.child in shared_of:
                raise CptMismatch(f"'{shared.child}' is declared as a child twice", {"node": shared.child})
            shared_of[shared.child] = shared

        parents_of: Dict[str, List[str]] = {pid: [] for pid in parts}
        for child, link in link_of.items():
            parents_of[child] = [link.parent]
        for child, shared in shared_of.items():
            parents_of[child] = list(shared.parents)

        for child, parents in parents_of.items():
            for parent in parents:
                if level_of[parent] >= level_of[child]:
                    raise LevelViolation(
                        f"'{parent}' ({spec.levels[level_of[parent]]}) cannot predict "
                        f"'{child}' ({spec.levels[level_of[child]]}); arcs must point down the hierarchy",
                        {"node": child, "parent": parent},
                    )

        # level order is a topological order
        order = sorted(parts, key=lambda pid: (level_of[pid], spec.part_ids().index(pid)))
        nodes, arcs, cpts = [], [], []
        for pid in order:
            part = parts[pid]
            label = part.label
            if pid in shared_of and shared_of[pid].meaning:
                label = shared_of[pid].meaning
            nodes.append(NodeDecl(id=pid, label=label, cardinality=part.cardinality, state_labels=part.state_labels))
            arcs.extend((parent, pid) for parent in parents_of[pid])
            cpts.append(self._part_cpt(part, parents_of[pid], parts, link_of.get(pid), shared_of.get(pid)))
        return net_core_service.build_net(nodes, arcs, cpts)

    def _part_cpt(
        self,
        part: PartSpec,
        parents: List[str],
        parts: Dict[str, PartSpec],
        link: Optional[LinkSpec],
        shared: Optional[SharedChildSpec],
    ) -> Cpt:
        if part.table is not None:
            return Cpt(node=part.id, parents=tuple(parents), table=part.table)
        if not parents:
            prior = part.prior or tuple([1.0 / part.cardinality] * part.cardinality)
            return Cpt(node=part.id, parents=(), table=(tuple(prior),))
        if shared is not None:
            if shared.relation == "table" or len(parents) != 2:
                raise CptMismatch(f"shared child '{part.id}' needs an explicit table", {"node": part.id})
            if part.cardinality != 2:
                raise CptMismatch(f"'{part.id}' must be binary for relation '{shared.relation}'", {"node": part.id})
            cards = (parts[parents[0]].cardinality, parts[parents[1]].cardinality)
            builder = self.exclusion_evidence_cpt if shared.relation == "exclusion" else self.coincidence_evidence_cpt
            return builder(cards[0], cards[1], shared.epsilon, node=part.id, parents=(parents[0], parents[1]))
        if part.cardinality != 2:
            raise CptMismatch(f"'{part.id}' is not binary; give it an explicit table", {"node": part.id})
        rows = []
        for state in range(parts[link.parent].cardinality):
            p = link.detection if state == PRESENT else link.false_alarm
            rows.append((p, 1.0 - p))
        return Cpt(node=part.id, parents=(link.parent,), table=tuple(rows))

    def generalized_cylinder(self, prior: Sequence[float] = (0.5, 0.5), epsilon: Optional[float] = None) -> DecompositionSpec:
        """Cylinder predicting face and axis independently; the limb depends on both."""
        return DecompositionSpec(
            parts=(
                PartSpec(id="cylinder", level="volume-primitive", prior=tuple(prior)),
                PartSpec(id="face", level="surface"),
                PartSpec(id="axis", level="surface"),
                PartSpec(id="face_edge", level="edge"),
                PartSpec(id="axis_edge", level="edge"),
                PartSpec(id="limb", level="edge"),
            ),
            links=(
                LinkSpec(parent="cylinder", child="face"),
                LinkSpec(parent="cylinder", child="axis"),
                LinkSpec(parent="face", child="face_edge"),
                LinkSpec(parent="axis", child="axis_edge"),
            ),
            shared_children=(
                SharedChildSpec(child="limb", parents=("face", "axis"), relation="coincidence", epsilon=epsilon),
            ),
        )

    # === BNET level statements ===
    def check_levels(self, doc: BnetDocument) -> None:
        for parent, child in doc.net.arcs:
            if parent in doc.levels and child in doc.levels and doc.levels[parent] >= doc.levels[child]:
                raise LevelViolation(
                    f"arc {parent} -> {child} points up the hierarchy (level {doc.levels[parent]} -> {doc.levels[child]})",
                    {"node": child, "parent": parent},
                )

    def spec_from_document(self, doc: BnetDocument) -> DecompositionSpec:
        net = doc.net
        missing = [n for n in net.node_ids if n not in doc.levels]
        if missing:
            raise LevelViolation(f"nodes without a level statement: {missing}", {"nodes": missing})
        self.check_levels(doc)
        names = {n: (DEFAULT_LEVELS[n] if 0 <= n < len(DEFAULT_LEVELS) else f"level-{n}") for n in set(doc.levels.values())}
        levels = tuple(names[n] for n in sorted(names))
        parts = tuple(
            PartSpec(
                id=node.id,
                level=names[doc.levels[node.id]],
                label=node.label,
                state_labels=node.state_labels,
                table=net.cpt(node.id).table,
            )
            for node in net.nodes
        )
        links, shared = [], []
        for node_id in net.node_ids:
            parents = net.parents(node_id)
            if len(parents) == 1:
                links.append(LinkSpec(parent=parents[0], child=node_id))
            elif len(parents) > 1:
                shared.append(SharedChildSpec(child=node_id, parents=tuple(parents)))
        return DecompositionSpec(levels=levels, parts=parts, links=tuple(links), shared_children=tuple(shared))

    def dependence_gap(self, joint: np.ndarray) -> float:
        """P(both present) - P(h1 present) P(h2 present) for a 2-D posterior joint."""
        joint = np.asarray(joint, dtype=float) / np.sum(joint)
        return float(joint[PRESENT, PRESENT] - joint[PRESENT, :].sum() * joint[:, PRESENT].sum())


# Global instance
vision_model_service = VisionModelService()
