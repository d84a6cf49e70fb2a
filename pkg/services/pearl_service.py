from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from models.net_models import BayesNet, Cpt, Evidence
from services.net_core_service import net_core_service
from utils.errors import (
    DimensionMismatch,
    EvidenceOnInternalNode,
    NotInstantiated,
    NotPolytree,
    NotTree,
    UnknownNode,
    WrongArity,
)
from utils.prob_utils import ProbUtils

Edge = Tuple[str, str]


class MessageState(BaseModel):
    """
    Messages of one propagation run.
    pi[(parent, child)] is over the parent's states; lam[(child, parent)] is
    over the parent's states too. Every vector is L1-normalized.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    pi: Dict[Edge, np.ndarray] = Field(default_factory=dict)
    lam: Dict[Edge, np.ndarray] = Field(default_factory=dict)
    beliefs: Dict[str, np.ndarray] = Field(default_factory=dict)
    schedule: List[Edge] = Field(default_factory=list)


class PearlService:
    """Pi/lambda message passing on singly connected nets."""

    # === Boundary messages ===
    def root_pi_message(
        self,
        prior: Sequence[float],
        incoming_lambdas: Mapping[str, Sequence[float]],
        excluding: Optional[str] = None,
    ) -> np.ndarray:
        """alpha * prior * product of the lambdas from every child except `excluding`."""
        message = np.asarray(prior, dtype=float).copy()
        for child, lam in incoming_lambdas.items():
            if child == excluding:
                continue
            lam = np.asarray(lam, dtype=float)
            if lam.shape != message.shape:
                raise DimensionMismatch(
                    f"lambda from '{child}' has {lam.size} states, prior has {message.size}",
                    {"child": child},
                )
            message = message * lam
        return ProbUtils.normalize(message, what="root pi message")

    def leaf_lambda_message(
        self,
        cpt: Cpt,
        evidence_state: Optional[int],
        incoming_pi: Sequence[float],
        target: str,
    ) -> np.ndarray:
        """
        lambda_target(i) = alpha * sum_j pi_j p(E=k | target=i, other=j).
        The slice is oriented receiving-parent x sending-parent.
        """
        if len(cpt.parents) != 2:
            raise WrongArity(f"leaf '{cpt.node}' has {len(cpt.parents)} parents, expected 2", {"node": cpt.node})
        if target not in cpt.parents:
            raise UnknownNode(f"'{target}' is not a parent of '{cpt.node}'", {"node": target})
        if evidence_state is None:
            raise NotInstantiated(f"leaf '{cpt.node}' must be instantiated to reflect a lambda message", {"node": cpt.node})

        pi = np.asarray(incoming_pi, dtype=float)
        table = cpt.as_array()
        n_rows, card = table.shape
        if not 0 <= evidence_state < card:
            raise DimensionMismatch(f"evidence state {evidence_state} out of range for '{cpt.node}'", {"node": cpt.node})
        if pi.size == 0 or n_rows % pi.size != 0:
            raise DimensionMismatch(f"incoming pi of length {pi.size} does not fit the cpt of '{cpt.node}'", {"node": cpt.node})

        if target == cpt.parents[0]:
            matrix = table[:, evidence_state].reshape(n_rows // pi.size, pi.size)
        else:
            matrix = table[:, evidence_state].reshape(pi.size, n_rows // pi.size).T
        return ProbUtils.normalize(matrix @ pi, what="leaf lambda message")

    # === Full propagation ===
    def propagate(self, net: BayesNet, evidence: Evidence) -> MessageState:
        """Two-phase collect/distribute sweep; exact on polytrees."""
        evidence = net_core_service.build_evidence(net, evidence.assignments)
        if not net_core_service.is_polytree(net):
            raise NotPolytree(
                "net has an undirected cycle; use the eigen solver (shared-leaf pair) or the exact oracle",
                {"structure": net_core_service.classify_structure(net).value},
            )
        self._check_leaf_evidence(net, evidence)

        state = MessageState()
        skeleton = net_core_service.skeleton(net)
        for component in sorted(nx.connected_components(skeleton), key=min):
            pivot = min(component)
            edges = list(nx.bfs_edges(skeleton, pivot, sort_neighbors=sorted))
            order = [pivot] + [v for _, v in edges]
            tree_parent = {v: u for u, v in edges}

            # collect toward the pivot
            for node_id in reversed(order[1:]):
                self._send(net, evidence, state, node_id, tree_parent[node_id])
            # distribute from the pivot
            for u, v in edges:
                self._send(net, evidence, state, u, v)

        for node_id in net.node_ids:
            belief = self._pi_vector(net, state, node_id) * self._lambda_vector(net, evidence, state, node_id)
            state.beliefs[node_id] = ProbUtils.normalize(belief, what=f"belief of '{node_id}'")
        return state

    def _check_leaf_evidence(self, net: BayesNet, evidence: Evidence) -> None:
        for node_id in evidence.assignments:
            if net.children(node_id):
                raise EvidenceOnInternalNode(
                    f"'{node_id}' has children; evidence is restricted to leaves here (use the exact solver)",
                    {"node": node_id},
                )

    def _evidence_vector(self, net: BayesNet, evidence: Evidence, node_id: str) -> np.ndarray:
        state = evidence.get(node_id)
        if state is None:
            return np.ones(net.cardinality(node_id))
        return ProbUtils.one_hot(net.cardinality(node_id), state)

    def _pi_vector(self, net: BayesNet, state: MessageState, node_id: str) -> np.ndarray:
        """pi(x) = sum_u p(x | u) prod_k pi_{U_k -> X}(u_k)."""
        parents = net.parents(node_id)
        n = len(parents)
        operands: list = [net.cpt_tensor(node_id), list(range(n + 1))]
        for k, parent in enumerate(parents):
            operands += [state.pi[(parent, node_id)], [k]]
        return np.einsum(*operands, [n])

    def _lambda_vector(
        self,
        net: BayesNet,
        evidence: Evidence,
        state: MessageState,
        node_id: str,
        excluding: Optional[str] = None,
    ) -> np.ndarray:
        lam = self._evidence_vector(net, evidence, node_id)
        for child in net.children(node_id):
            if child != excluding:
                lam = lam * state.lam[(child, node_id)]
        return lam

    def _send(self, net: BayesNet, evidence: Evidence, state: MessageState, sender: str, receiver: str) -> None:
        if receiver in net.children(sender):
            message = self._pi_vector(net, state, sender) * self._lambda_vector(
                net, evidence, state, sender, excluding=receiver
            )
            state.pi[(sender, receiver)] = ProbUtils.normalize(message, what=f"pi message {sender} -> {receiver}")
        else:
            parents = net.parents(sender)
            n = len(parents)
            target = parents.index(receiver)
            operands: list = [
                net.cpt_tensor(sender), list(range(n + 1)),
                self._lambda_vector(net, evidence, state, sender), [n],
            ]
            for k, parent in enumerate(parents):
                if k != target:
                    operands += [state.pi[(parent, sender)], [k]]
            message = np.einsum(*operands, [target])
            state.lam[(sender, receiver)] = ProbUtils.normalize(message, what=f"lambda message {sender} -> {receiver}")
        state.schedule.append((sender, receiver))

    # === Upward-only updating on trees ===
    def lambda_only_update(self, net: BayesNet, evidence: Evidence, root: str) -> np.ndarray:
        """Root posterior from a single upward lambda pass; no pi messages."""
        evidence = net_core_service.build_evidence(net, evidence.assignments)
        if not net.has_node(root):
            raise UnknownNode(f"unknown root '{root}'", {"node": root})
        if not net_core_service.is_tree(net):
            raise NotTree(
                f"lambda-only updating needs a tree, net is {net_core_service.classify_structure(net).value}",
                {"structure": net_core_service.classify_structure(net).value},
            )
        if net.parents(root):
            raise NotTree(f"'{root}' is not the root of the tree", {"node": root})
        self._check_leaf_evidence(net, evidence)

        graph = nx.DiGraph()
        graph.add_nodes_from(net.node_ids)
        graph.add_edges_from(net.arcs)
        upward: Dict[str, np.ndarray] = {}
        for node_id in nx.dfs_postorder_nodes(graph, root):
            lam = self._evidence_vector(net, evidence, node_id)
            for child in net.children(node_id):
                lam = lam * upward[child]
            if node_id == root:
                return ProbUtils.normalize(net.prior(root) * lam, what=f"posterior of '{root}'")
            matrix = net.cpt(node_id).as_array()  # parent states x node states
            upward[node_id] = ProbUtils.normalize(matrix @ lam, what=f"lambda message from '{node_id}'")
        raise NotTree(f"'{root}' was not reached", {"node": root})


# Global instance
pearl_service = PearlService()
