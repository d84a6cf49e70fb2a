from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from models.net_models import BayesNet, Evidence
from services.net_core_service import net_core_service
from utils.config_reader import get_solver_settings
from utils.errors import InvalidEvidence, TooLarge, UnknownNode, ZeroProbabilityEvidence
from utils.prob_utils import ProbUtils


class JointTable(BaseModel):
    """Full joint over `order`; `probabilities` has one axis per node, in that order."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    order: List[str]
    probabilities: np.ndarray

    def flat(self) -> np.ndarray:
        """Row-major over `order` (last node fastest)."""
        return self.probabilities.reshape(-1)

    def axis(self, node_id: str) -> int:
        try:
            return self.order.index(node_id)
        except ValueError:
            raise UnknownNode(f"unknown node '{node_id}'", {"node": node_id})

    def marginal(self, node_id: str) -> np.ndarray:
        axis = self.axis(node_id)
        others = tuple(i for i in range(len(self.order)) if i != axis)
        return self.probabilities.sum(axis=others)


class OracleService:
    """Brute-force exact inference by enumerating the full joint."""

    def _check_size(self, net: BayesNet, size_cap: Optional[int]) -> None:
        cap = size_cap if size_cap is not None else get_solver_settings().size_cap
        size = int(np.prod([n.cardinality for n in net.nodes], dtype=object))
        if size > cap:
            raise TooLarge(
                f"joint has {size} entries, above the enumeration cap of {cap} (RECOGNET_SIZE_CAP)",
                {"size": size, "cap": cap},
            )

    def joint_enumeration(self, net: BayesNet, size_cap: Optional[int] = None) -> JointTable:
        self._check_size(net, size_cap)
        order = list(net.node_ids)
        axis_of = {node_id: i for i, node_id in enumerate(order)}
        shape = [net.cardinality(n) for n in order]
        joint = np.ones(shape)
        for node_id in order:
            axes = [axis_of[p] for p in net.parents(node_id)] + [axis_of[node_id]]
            factor = net.cpt_tensor(node_id)
            perm = np.argsort(axes)
            target = [1] * len(order)
            for ax in axes:
                target[ax] = shape[ax]
            joint = joint * factor.transpose(perm).reshape(target)
        return JointTable(order=order, probabilities=joint)

    def condition(self, joint: JointTable, evidence: Evidence) -> np.ndarray:
        """Joint restricted to the evidence (unnormalized); other entries zeroed."""
        mask = np.ones(joint.probabilities.shape, dtype=bool)
        for node_id, state in evidence.assignments.items():
            axis = joint.axis(node_id)
            keep = np.zeros(joint.probabilities.shape[axis], dtype=bool)
            if not 0 <= state < keep.size:
                raise InvalidEvidence(
                    f"evidence state {state} out of range for '{node_id}' (cardinality {keep.size})",
                    {"node": node_id, "state": state},
                )
            keep[state] = True
            shape = [1] * joint.probabilities.ndim
            shape[axis] = -1
            mask = mask & keep.reshape(shape)
        return np.where(mask, joint.probabilities, 0.0)

    def evidence_probability(self, net: BayesNet, evidence: Evidence, size_cap: Optional[int] = None) -> float:
        evidence = net_core_service.build_evidence(net, evidence.assignments)
        joint = self.joint_enumeration(net, size_cap)
        return float(self.condition(joint, evidence).sum())

    def posterior(
        self,
        net: BayesNet,
        evidence: Evidence,
        query: str,
        size_cap: Optional[int] = None,
    ) -> np.ndarray:
        return self.posteriors(net, evidence, [query], size_cap)[query]

    def posteriors(
        self,
        net: BayesNet,
        evidence: Evidence,
        queries: List[str],
        size_cap: Optional[int] = None,
    ) -> Dict[str, np.ndarray]:
        """Exact conditional marginals of every query node; one enumeration for all."""
        for node_id in queries:
            if not net.has_node(node_id):
                raise UnknownNode(f"unknown query node '{node_id}'", {"node": node_id})
        evidence = net_core_service.build_evidence(net, evidence.assignments)
        joint = self.joint_enumeration(net, size_cap)
        conditioned = JointTable(order=joint.order, probabilities=self.condition(joint, evidence))
        return {
            node_id: ProbUtils.normalize(
                conditioned.marginal(node_id),
                error_cls=ZeroProbabilityEvidence,
                what="evidence",
            )
            for node_id in queries
        }

    def pre_posterior(self, net: BayesNet, node: str, size_cap: Optional[int] = None) -> np.ndarray:
        if not net.has_node(node):
            raise UnknownNode(f"unknown node '{node}'", {"node": node})
        return self.joint_enumeration(net, size_cap).marginal(node)


# Global instance
oracle_service = OracleService()
