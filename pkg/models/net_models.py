from enum import Enum
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class StructureClass(str, Enum):
    TREE = "Tree"
    POLYTREE = "Polytree"
    SHARED_LEAF_PAIR = "SharedLeafPair"
    GENERAL = "General"


# === Pydantic Models for the net ===
class NodeDecl(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str
    label: Optional[str] = None
    cardinality: int
    state_labels: Tuple[str, ...] = ()

    @model_validator(mode="before")
    @classmethod
    def default_state_labels(cls, data):
        # missing labels become s0, s1, ...
        if isinstance(data, dict) and not data.get("state_labels"):
            card = data.get("cardinality")
            if isinstance(card, int) and card > 0:
                data = {**data, "state_labels": tuple(f"s{i}" for i in range(card))}
        return data

    @property
    def display_name(self) -> str:
        return self.label or self.id


class Cpt(BaseModel):
    """
    p(node | parents). `table` has one row per parent-state combination in
    row-major order (last declared parent varying fastest) and one column per
    node state. Root nodes have a single row: the prior.
    """

    model_config = ConfigDict(frozen=True)

    node: str
    parents: Tuple[str, ...] = ()
    table: Tuple[Tuple[float, ...], ...]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.table, dtype=float)

    def tensor(self, parent_cards: List[int]) -> np.ndarray:
        """The table reshaped to (card(parent_1), ..., card(parent_n), card(node))."""
        arr = self.as_array()
        return arr.reshape(tuple(parent_cards) + (arr.shape[1],))


class Evidence(BaseModel):
    model_config = ConfigDict(frozen=True)

    assignments: Dict[str, int] = Field(default_factory=dict)

    def __contains__(self, node_id: str) -> bool:
        return node_id in self.assignments

    def get(self, node_id: str) -> Optional[int]:
        return self.assignments.get(node_id)

    def without(self, node_id: str) -> "Evidence":
        return Evidence(assignments={k: v for k, v in self.assignments.items() if k != node_id})


class BayesNet(BaseModel):
    """Validated, immutable net. Build through `net_core_service.build_net`."""

    model_config = ConfigDict(frozen=True)

    nodes: Tuple[NodeDecl, ...]
    arcs: Tuple[Tuple[str, str], ...] = ()
    cpts: Tuple[Cpt, ...]

    @cached_property
    def node_ids(self) -> List[str]:
        return [n.id for n in self.nodes]

    @cached_property
    def node_index(self) -> Dict[str, NodeDecl]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def cpt_index(self) -> Dict[str, Cpt]:
        return {c.node: c for c in self.cpts}

    @cached_property
    def children_index(self) -> Dict[str, List[str]]:
        children: Dict[str, List[str]] = {n.id: [] for n in self.nodes}
        for parent, child in self.arcs:
            children[parent].append(child)
        return children

    def has_node(self, node_id: str) -> bool:
        return node_id in self.node_index

    def node(self, node_id: str) -> NodeDecl:
        return self.node_index[node_id]

    def cpt(self, node_id: str) -> Cpt:
        return self.cpt_index[node_id]

    def cardinality(self, node_id: str) -> int:
        return self.node_index[node_id].cardinality

    def parents(self, node_id: str) -> List[str]:
        return list(self.cpt_index[node_id].parents)

    def children(self, node_id: str) -> List[str]:
        return list(self.children_index[node_id])

    def cpt_tensor(self, node_id: str) -> np.ndarray:
        cards = [self.cardinality(p) for p in self.parents(node_id)]
        return self.cpt(node_id).tensor(cards)

    def prior(self, node_id: str) -> np.ndarray:
        """Prior row of a root node."""
        return self.cpt(node_id).as_array()[0]
