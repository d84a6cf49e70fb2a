from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from models.net_models import BayesNet, Cpt, Evidence, NodeDecl
from services.net_core_service import net_core_service

MIN_CARDINALITY = 2
MAX_CARDINALITY = 3


class NetGenerators:
    """Seeded random nets for property checks and the batch solver check."""

    @staticmethod
    def random_cpt(rng: np.random.Generator, node: str, parents: Sequence[str], card: int, parent_cards: Sequence[int]) -> Cpt:
        """Dirichlet(1, ..., 1) rows, one per parent configuration."""
        n_rows = int(np.prod(parent_cards)) if parent_cards else 1
        rows = rng.dirichlet(np.ones(card), size=n_rows)
        # keep rows away from exact zeros so every evidence pattern is possible
        rows = (rows + 1e-3) / (rows + 1e-3).sum(axis=1, keepdims=True)
        return Cpt(node=node, parents=tuple(parents), table=tuple(tuple(float(v) for v in row) for row in rows))

    @staticmethod
    def _assemble(rng: np.random.Generator, cards: Dict[str, int], arcs: List[Tuple[str, str]]) -> BayesNet:
        nodes = [NodeDecl(id=node_id, cardinality=card) for node_id, card in cards.items()]
        cpts = []
        for node_id, card in cards.items():
            parents = [p for p, c in arcs if c == node_id]
            cpts.append(NetGenerators.random_cpt(rng, node_id, parents, card, [cards[p] for p in parents]))
        return net_core_service.build_net(nodes, arcs, cpts)

    @staticmethod
    def _random_cards(rng: np.random.Generator, n_nodes: int, max_card: int) -> Dict[str, int]:
        return {f"n{i}": int(rng.integers(MIN_CARDINALITY, max_card + 1)) for i in range(n_nodes)}

    @staticmethod
    def random_tree(rng: np.random.Generator, n_nodes: int, max_card: int = MAX_CARDINALITY) -> BayesNet:
        """Rooted at n0; every other node hangs under an earlier one."""
        cards = NetGenerators._random_cards(rng, n_nodes, max_card)
        arcs = [(f"n{int(rng.integers(0, i))}", f"n{i}") for i in range(1, n_nodes)]
        return NetGenerators._assemble(rng, cards, arcs)

    @staticmethod
    def random_polytree(rng: np.random.Generator, n_nodes: int, max_card: int = MAX_CARDINALITY) -> BayesNet:
        """Random undirected tree with every edge oriented by a coin flip."""
        cards = NetGenerators._random_cards(rng, n_nodes, max_card)
        arcs = []
        for i in range(1, n_nodes):
            j = int(rng.integers(0, i))
            arcs.append((f"n{j}", f"n{i}") if rng.random() < 0.5 else (f"n{i}", f"n{j}"))
        return NetGenerators._assemble(rng, cards, arcs)

    @staticmethod
    def random_dag(
        rng: np.random.Generator,
        n_nodes: int,
        edge_probability: float = 0.4,
        max_parents: int = 3,
        max_card: int = MAX_CARDINALITY,
    ) -> BayesNet:
        cards = NetGenerators._random_cards(rng, n_nodes, max_card)
        arcs = []
        for child in range(1, n_nodes):
            candidates = [p for p in range(child) if rng.random() < edge_probability]
            for parent in candidates[:max_parents]:
                arcs.append((f"n{parent}", f"n{child}"))
        return NetGenerators._assemble(rng, cards, arcs)

    @staticmethod
    def leaf_evidence(rng: np.random.Generator, net: BayesNet, fraction: float = 0.6) -> Evidence:
        """Instantiate a random subset of the leaves."""
        assignments = {}
        for leaf in net_core_service.leaves(net):
            if net.parents(leaf) and rng.random() < fraction:
                assignments[leaf] = int(rng.integers(0, net.cardinality(leaf)))
        return Evidence(assignments=assignments)

    @staticmethod
    def random_evidence(rng: np.random.Generator, net: BayesNet, fraction: float = 0.3) -> Evidence:
        assignments = {
            n: int(rng.integers(0, net.cardinality(n))) for n in net.node_ids if rng.random() < fraction
        }
        return Evidence(assignments=assignments)

    @staticmethod
    def separable_shared_leaf_pair(
        rng: np.random.Generator,
        card1: int = 2,
        card2: int = 2,
        private_leaves: int = 0,
        separable: bool = True,
    ) -> Tuple[BayesNet, Evidence]:
        """
        Roots h1, h2 with two binary shared leaves E1, E2 instantiated to state 0.
        With `separable`, p(E_i = 0 | h1, h2) = f_i(h1) g_i(h2).
        """
        cards = {"h1": card1, "h2": card2}
        nodes = [NodeDecl(id="h1", cardinality=card1), NodeDecl(id="h2", cardinality=card2)]
        arcs: List[Tuple[str, str]] = []
        cpts = [
            NetGenerators.random_cpt(rng, "h1", [], card1, []),
            NetGenerators.random_cpt(rng, "h2", [], card2, []),
        ]
        for leaf in ("E1", "E2"):
            if separable:
                present = np.outer(rng.uniform(0.05, 0.95, card1), rng.uniform(0.05, 0.95, card2)).reshape(-1)
            else:
                present = rng.uniform(0.05, 0.95, card1 * card2)
            nodes.append(NodeDecl(id=leaf, cardinality=2))
            arcs += [("h1", leaf), ("h2", leaf)]
            cpts.append(Cpt(node=leaf, parents=("h1", "h2"), table=tuple((float(p), float(1.0 - p)) for p in present)))
        evidence = {"E1": 0, "E2": 0}
        for k in range(private_leaves):
            root = "h1" if k % 2 == 0 else "h2"
            leaf = f"P{k}"
            nodes.append(NodeDecl(id=leaf, cardinality=2))
            arcs.append((root, leaf))
            cpts.append(NetGenerators.random_cpt(rng, leaf, [root], 2, [cards[root]]))
            evidence[leaf] = int(rng.integers(0, 2))
        net = net_core_service.build_net(nodes, arcs, cpts)
        return net, Evidence(assignments=evidence)

    @staticmethod
    def without_leaf(net: BayesNet, evidence: Evidence, drop_leaf: str) -> Tuple[BayesNet, Evidence]:
        """The net with one leaf removed; a shared-leaf pair minus a shared leaf is a polytree."""
        nodes = [n for n in net.nodes if n.id != drop_leaf]
        arcs = [a for a in net.arcs if drop_leaf not in a]
        cpts = [c for c in net.cpts if c.node != drop_leaf]
        kept = net_core_service.build_net(nodes, arcs, cpts)
        return kept, evidence.without(drop_leaf)

    @staticmethod
    def seeded(seed: Optional[int]) -> np.random.Generator:
        return np.random.default_rng(seed)
