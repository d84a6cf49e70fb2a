from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from models.net_models import BayesNet, Cpt, Evidence, NodeDecl, StructureClass
from utils.config_reader import get_solver_settings
from utils.console import warn
from utils.errors import (
    CptMismatch,
    CycleDetected,
    InvalidEvidence,
    InvalidNode,
    NoSuchArc,
    UnknownNode,
    WouldCreateCycle,
    WrongArity,
)
from utils.prob_utils import ROW_TOLERANCE


class NetCoreService:
    """Construction, validation and structural operations on discrete Bayes nets."""

    # === Build & validation ===
    def build_net(
        self,
        nodes: Sequence[NodeDecl],
        arcs: Iterable[Tuple[str, str]],
        cpts: Sequence[Cpt],
    ) -> BayesNet:
        nodes = list(nodes)
        arcs = [tuple(a) for a in arcs]
        cpts = list(cpts)

        self._check_nodes(nodes)
        node_ids = {n.id for n in nodes}
        cards = {n.id: n.cardinality for n in nodes}

        seen_arcs = set()
        in_arcs: Dict[str, List[str]] = {n.id: [] for n in nodes}
        for parent, child in arcs:
            for end in (parent, child):
                if end not in node_ids:
                    raise UnknownNode(f"arc {parent} -> {child} refers to undeclared node '{end}'", {"node": end})
            if (parent, child) in seen_arcs:
                raise CptMismatch(f"duplicate arc {parent} -> {child}", {"arc": [parent, child]})
            seen_arcs.add((parent, child))
            in_arcs[child].append(parent)

        graph = nx.DiGraph()
        graph.add_nodes_from(n.id for n in nodes)
        graph.add_edges_from(arcs)
        if not nx.is_directed_acyclic_graph(graph):
            cycle = [u for u, _ in nx.find_cycle(graph)]
            path = " -> ".join(cycle + [cycle[0]])
            raise CycleDetected(f"arc set contains a directed cycle: {path}", {"cycle": cycle})

        by_node: Dict[str, Cpt] = {}
        for cpt in cpts:
            if cpt.node not in node_ids:
                raise UnknownNode(f"cpt given for undeclared node '{cpt.node}'", {"node": cpt.node})
            if cpt.node in by_node:
                raise CptMismatch(f"more than one cpt for node '{cpt.node}'", {"node": cpt.node})
            by_node[cpt.node] = cpt

        for node in nodes:
            cpt = by_node.get(node.id)
            if cpt is None:
                raise CptMismatch(f"node '{node.id}' has no cpt", {"node": node.id})
            self._check_cpt(cpt, in_arcs[node.id], cards)

        # cpts follow node declaration order
        return BayesNet(nodes=tuple(nodes), arcs=tuple(arcs), cpts=tuple(by_node[n.id] for n in nodes))

    def _check_nodes(self, nodes: List[NodeDecl]) -> None:
        if not nodes:
            raise InvalidNode("net declares no nodes")
        seen = set()
        for node in nodes:
            if node.id in seen:
                raise InvalidNode(f"node '{node.id}' declared twice", {"node": node.id})
            seen.add(node.id)
            if node.cardinality < 2:
                raise InvalidNode(f"node '{node.id}' needs cardinality >= 2, got {node.cardinality}", {"node": node.id})
            if len(node.state_labels) != node.cardinality:
                raise InvalidNode(
                    f"node '{node.id}' has {len(node.state_labels)} state labels for cardinality {node.cardinality}",
                    {"node": node.id},
                )
            if len(set(node.state_labels)) != len(node.state_labels):
                raise InvalidNode(f"node '{node.id}' has duplicate state labels", {"node": node.id})

    def _check_cpt(self, cpt: Cpt, in_arcs: List[str], cards: Dict[str, int]) -> None:
        if list(cpt.parents) != in_arcs:
            raise CptMismatch(
                f"cpt of '{cpt.node}' lists parents {list(cpt.parents)} but its in-arcs are {in_arcs}",
                {"node": cpt.node},
            )
        n_rows = int(np.prod([cards[p] for p in cpt.parents])) if cpt.parents else 1
        card = cards[cpt.node]
        if len(cpt.table) != n_rows or any(len(row) != card for row in cpt.table):
            raise CptMismatch(
                f"cpt of '{cpt.node}' must be {n_rows} rows x {card} columns",
                {"node": cpt.node, "rows": n_rows, "columns": card},
            )
        table = cpt.as_array()
        for r, row in enumerate(table):
            if not np.all(np.isfinite(row)) or np.any(row < 0.0) or np.any(row > 1.0):
                raise CptMismatch(f"cpt of '{cpt.node}' row {r} has entries outside [0, 1]", {"node": cpt.node, "row": r})
            total = float(row.sum())
            if abs(total - 1.0) > ROW_TOLERANCE:
                raise CptMismatch(
                    f"cpt of '{cpt.node}' row {r} sums to {total:.12g}, not 1",
                    {"node": cpt.node, "row": r, "sum": total},
                )
        zero_rows = [r for r, row in enumerate(table) if np.any(row == 0.0)]
        if zero_rows:
            warn(f"cpt of '{cpt.node}' has zero-probability states in rows {zero_rows}")

    def build_evidence(self, net: BayesNet, assignments: Dict[str, int]) -> Evidence:
        for node_id, state in assignments.items():
            if not net.has_node(node_id):
                raise UnknownNode(f"evidence on undeclared node '{node_id}'", {"node": node_id})
            card = net.cardinality(node_id)
            if not isinstance(state, (int, np.integer)) or not 0 <= state < card:
                raise InvalidEvidence(
                    f"evidence state {state} out of range for '{node_id}' (cardinality {card})",
                    {"node": node_id, "state": state},
                )
        return Evidence(assignments=dict(assignments))

    # === Structure ===
    def skeleton(self, net: BayesNet) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(net.node_ids)
        graph.add_edges_from(net.arcs)
        return graph

    def roots(self, net: BayesNet) -> List[str]:
        return [n for n in net.node_ids if not net.parents(n)]

    def leaves(self, net: BayesNet) -> List[str]:
        return [n for n in net.node_ids if not net.children(n)]

    def is_polytree(self, net: BayesNet) -> bool:
        return nx.is_forest(self.skeleton(net))

    def is_tree(self, net: BayesNet) -> bool:
        return nx.is_tree(self.skeleton(net)) and all(len(net.parents(n)) <= 1 for n in net.node_ids)

    def is_shared_leaf_pair(self, net: BayesNet) -> bool:
        roots = self.roots(net)
        if len(roots) != 2:
            return False
        root_set = set(roots)
        for node_id in net.node_ids:
            if node_id in root_set:
                continue
            if net.children(node_id) or not set(net.parents(node_id)) <= root_set:
                return False
        return bool(self.shared_leaves(net))

    def shared_leaves(self, net: BayesNet) -> List[str]:
        """Leaves whose parents are exactly the two roots of a shared-leaf pair."""
        roots = set(self.roots(net))
        return [
            n for n in net.node_ids
            if not net.children(n) and len(net.parents(n)) == 2 and set(net.parents(n)) == roots
        ]

    def classify_structure(self, net: BayesNet) -> StructureClass:
        # Tree first, then the shared-leaf pair (which may also be a polytree
        # when it has a single shared leaf), then polytree.
        if self.is_tree(net):
            return StructureClass.TREE
        if self.is_shared_leaf_pair(net):
            return StructureClass.SHARED_LEAF_PAIR
        if self.is_polytree(net):
            return StructureClass.POLYTREE
        return StructureClass.GENERAL

    # === Arc reversal ===
    def reverse_arc(self, net: BayesNet, parent: str, child: str) -> BayesNet:
        """
        Flip parent -> child by Bayes rule. Both endpoints inherit the union of
        the two nodes' parents; the joint distribution is unchanged.
        """
        for node_id in (parent, child):
            if not net.has_node(node_id):
                raise UnknownNode(f"unknown node '{node_id}'", {"node": node_id})
        if (parent, child) not in set(net.arcs):
            raise NoSuchArc(f"no arc {parent} -> {child}", {"arc": [parent, child]})

        graph = nx.DiGraph()
        graph.add_nodes_from(net.node_ids)
        graph.add_edges_from(a for a in net.arcs if a != (parent, child))
        if nx.has_path(graph, parent, child):
            path = nx.shortest_path(graph, parent, child)
            raise WouldCreateCycle(
                f"reversing {parent} -> {child} closes the path {' -> '.join(path)}",
                {"path": path},
            )

        x, y = parent, child
        a_parents = net.parents(x)
        y_parents = net.parents(y)
        b_parents = [p for p in y_parents if p != x]
        new_y_parents = b_parents + [p for p in a_parents if p not in b_parents]
        new_x_parents = a_parents + [p for p in b_parents if p not in a_parents] + [y]

        involved = dict.fromkeys(a_parents + y_parents + [x, y])
        labels = {node_id: i for i, node_id in enumerate(involved)}

        def lab(ids: List[str]) -> List[int]:
            return [labels[i] for i in ids]

        # phi(u, x, y) = p(x | A) p(y | x, B)
        phi = np.einsum(
            net.cpt_tensor(x), lab(a_parents + [x]),
            net.cpt_tensor(y), lab(y_parents + [y]),
            lab(new_y_parents + [x, y]),
        )
        p_y = np.einsum(phi, lab(new_y_parents + [x, y]), lab(new_y_parents + [y]))

        joint_x = np.einsum(phi, lab(new_y_parents + [x, y]), lab(new_x_parents + [x]))
        denom = np.einsum(p_y, lab(new_y_parents + [y]), lab(new_x_parents))
        card_x = net.cardinality(x)
        zero = denom == 0.0
        if np.any(zero):
            warn(
                f"reversing {x} -> {y}: {int(zero.sum())} parent configurations of '{x}' have zero probability; "
                "their rows are set uniform"
            )
        safe = np.where(zero, 1.0, denom)
        p_x = joint_x / safe[..., None]
        p_x[zero] = 1.0 / card_x

        new_cpts = []
        for cpt in net.cpts:
            if cpt.node == y:
                new_cpts.append(self._cpt_from_array(y, new_y_parents, p_y, net.cardinality(y)))
            elif cpt.node == x:
                new_cpts.append(self._cpt_from_array(x, new_x_parents, p_x, card_x))
            else:
                new_cpts.append(cpt)
        new_arcs = [(p, c.node) for c in new_cpts for p in c.parents]
        return self.build_net(net.nodes, new_arcs, new_cpts)

    def _cpt_from_array(self, node_id: str, parents: List[str], values: np.ndarray, card: int) -> Cpt:
        rows = values.reshape(-1, card)
        return Cpt(node=node_id, parents=tuple(parents), table=tuple(tuple(float(v) for v in row) for row in rows))

    # === Separability ===
    def evidence_slice(self, net: BayesNet, leaf: str, state: int) -> np.ndarray:
        """M(i, j) = p(leaf = state | parent_1 = i, parent_2 = j)."""
        if len(net.parents(leaf)) != 2:
            raise WrongArity(f"'{leaf}' has {len(net.parents(leaf))} parents, expected 2", {"node": leaf})
        return net.cpt_tensor(leaf)[:, :, state]

    def separability_check(
        self,
        cpt: Cpt,
        parent_cards: Tuple[int, int],
        tolerance: Optional[float] = None,
    ) -> List[bool]:
        """
        For each child state k, whether p(E=k | P1, P2) factorizes as a_k(P1) b_k(P2).
        Rank-1 test with relative minors: |minor| <= tolerance * max_entry^2.
        """
        if len(cpt.parents) != 2 or len(parent_cards) != 2:
            raise WrongArity(f"separability needs exactly two parents, '{cpt.node}' has {len(cpt.parents)}", {"node": cpt.node})
        if tolerance is None:
            tolerance = get_solver_settings().separability_tolerance
        tensor = cpt.tensor(list(parent_cards))
        return [self.is_rank_one(tensor[:, :, k], tolerance) for k in range(tensor.shape[2])]

    @staticmethod
    def is_rank_one(matrix: np.ndarray, tolerance: float) -> bool:
        m = np.asarray(matrix, dtype=float)
        scale = float(np.abs(m).max()) if m.size else 0.0
        if scale == 0.0:
            return True
        # minors[i, i2, j, j2] = m[i, j] m[i2, j2] - m[i, j2] m[i2, j]
        minors = m[:, None, :, None] * m[None, :, None, :] - m[:, None, None, :] * m[None, :, :, None]
        return bool(np.abs(minors).max() <= tolerance * scale * scale)


# Global instance
net_core_service = NetCoreService()
