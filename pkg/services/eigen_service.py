from typing import Dict, Literal, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict

from models.net_models import BayesNet, Evidence
from services.net_core_service import net_core_service
from utils.config_reader import get_solver_settings
from utils.console import warn
from utils.errors import (
    DegenerateSpectrum,
    DimensionMismatch,
    NonConvergence,
    NotSharedLeafPair,
    UninstantiatedLeaf,
)
from utils.prob_utils import ProbUtils

Orientation = Literal["literal", "explicit"]
EigenMethod = Literal["power", "direct"]

ALPHA_CONVENTION_NOTE = (
    "alpha is ambiguous: the recursion constant is 1/eigenvalue of the cycle matrix, "
    "while a quoted alpha may instead match the dominant eigenvalue of a leaf slice P; both are listed"
)


class CycleMatrix(BaseModel):
    """
    a   = diag(prior_1) p2 diag(prior_2) p1   (cycle through pi_11)
    a_t = the transposed cycle through pi_22
    likelihoods are the evidence slices M_i(r, c) = p(E_i = k_i | h1 = r, h2 = c).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    roots: Tuple[str, str]
    leaves: Tuple[str, str]
    orientation: str
    priors: Tuple[np.ndarray, np.ndarray]
    likelihoods: Tuple[np.ndarray, np.ndarray]
    p1: np.ndarray
    p2: np.ndarray
    a: np.ndarray
    a_t: np.ndarray


class Eigenpair(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    value: float
    vector: np.ndarray
    residual: float
    iterations: int
    method: str
    perron: bool


class MessageCycleTrace(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    pi_11: np.ndarray
    lambda_12: np.ndarray
    pi_22: np.ndarray
    lambda_21: np.ndarray
    iterations: int
    step_distance: float


class AlphaReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    cycle_eigenvalue: float
    transposed_cycle_eigenvalue: float
    recursion_alpha: float
    leaf_slice_eigenvalues: Dict[str, Optional[float]]
    note: str = ALPHA_CONVENTION_NOTE


class SharedLeafSolution(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    beliefs: Dict[str, np.ndarray]
    completed_beliefs: Dict[str, np.ndarray]
    cycle: CycleMatrix
    eigenpair: Eigenpair
    transposed_eigenpair: Eigenpair
    alpha_report: AlphaReport
    method_agreement: Optional[float] = None


class EigenService:
    """Fixed-point solution of the shared-leaf pair through the cycle matrix."""

    # === Cycle matrix ===
    def build_cycle_matrix(
        self,
        net: BayesNet,
        evidence: Evidence,
        orientation: Orientation = "literal",
    ) -> CycleMatrix:
        if not net_core_service.is_shared_leaf_pair(net):
            raise NotSharedLeafPair(
                f"net is {net_core_service.classify_structure(net).value}, not a shared-leaf pair",
                {"structure": net_core_service.classify_structure(net).value},
            )
        evidence = net_core_service.build_evidence(net, evidence.assignments)
        h1, h2 = net_core_service.roots(net)
        shared = net_core_service.shared_leaves(net)
        if len(shared) != 2:
            raise NotSharedLeafPair(
                f"the cycle matrix needs exactly two shared leaves, found {len(shared)}",
                {"shared_leaves": shared},
            )
        for leaf in shared:
            if leaf not in evidence:
                raise UninstantiatedLeaf(f"shared leaf '{leaf}' has no evidence", {"node": leaf})

        m1, m2 = (self._oriented_slice(net, leaf, h1, evidence.get(leaf)) for leaf in shared)
        d1 = np.diag(self._effective_prior(net, evidence, h1))
        d2 = np.diag(self._effective_prior(net, evidence, h2))

        if orientation == "literal":
            if m1.shape[0] != m1.shape[1]:
                raise DimensionMismatch(
                    f"the literal cycle needs equal cardinalities for '{h1}' and '{h2}'; use orientation 'explicit'",
                    {"shape": list(m1.shape)},
                )
            p1, p2 = m1, m2
            a_t = d2 @ m1.T @ d1 @ m2.T
        elif orientation == "explicit":
            p1, p2 = m1.T, m2
            a_t = d2 @ m1.T @ d1 @ m2
        else:
            raise ValueError(f"unknown orientation '{orientation}'")
        a = d1 @ p2 @ d2 @ p1

        return CycleMatrix(
            roots=(h1, h2),
            leaves=(shared[0], shared[1]),
            orientation=orientation,
            priors=(np.diag(d1).copy(), np.diag(d2).copy()),
            likelihoods=(m1, m2),
            p1=p1,
            p2=p2,
            a=a,
            a_t=a_t,
        )

    def _oriented_slice(self, net: BayesNet, leaf: str, h1: str, state: int) -> np.ndarray:
        matrix = net_core_service.evidence_slice(net, leaf, state)
        # rows always index h1
        return matrix if net.parents(leaf)[0] == h1 else matrix.T

    def _effective_prior(self, net: BayesNet, evidence: Evidence, root: str) -> np.ndarray:
        """Root prior times the lambdas of its private (single-parent) leaves."""
        prior = net.prior(root).copy()
        if root in evidence:
            prior = prior * ProbUtils.one_hot(prior.size, evidence.get(root))
        for child in net.children(root):
            if len(net.parents(child)) != 1:
                continue
            state = evidence.get(child)
            if state is not None:
                prior = prior * net.cpt(child).as_array()[:, state]
        return ProbUtils.normalize(prior, what=f"effective prior of '{root}'")

    # === Eigenpairs ===
    def dominant_eigenpair(
        self,
        matrix: Sequence[Sequence[float]],
        tolerance: Optional[float] = None,
        max_iterations: Optional[int] = None,
        method: EigenMethod = "power",
    ) -> Eigenpair:
        settings = get_solver_settings()
        tolerance = settings.power_tolerance if tolerance is None else tolerance
        max_iterations = settings.max_iterations if max_iterations is None else max_iterations

        a = np.asarray(matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise DimensionMismatch(f"expected a square matrix, got shape {list(a.shape)}", {"shape": list(a.shape)})
        if not np.all(np.isfinite(a)) or np.any(a < 0.0):
            raise DimensionMismatch("matrix must be finite and nonnegative")
        if not np.any(a > 0.0):
            raise DegenerateSpectrum("matrix is all zero")

        perron = bool(np.all(a > 0.0))
        if not perron:
            warn("matrix has zero entries; Perron uniqueness is not guaranteed, solving in nonnegative mode")

        moduli = self._spectrum_moduli(a)
        # gap relative to the spectral radius
        if len(moduli) > 1 and moduli[0] - moduli[1] < tolerance * moduli[0]:
            raise DegenerateSpectrum(
                f"dominant eigenvalue is not separated (|l1| - |l2| = {moduli[0] - moduli[1]:.3g}); the fixed point is ambiguous",
                {"moduli": [float(m) for m in moduli[:2]]},
            )

        if method == "direct":
            value, vector = self._direct(a)
            iterations = 0
        elif method == "power":
            value, vector, iterations = self._power_iteration(a, tolerance, max_iterations)
        else:
            raise ValueError(f"unknown method '{method}'")

        residual = float(np.abs(a @ vector - value * vector).sum())
        return Eigenpair(
            value=value,
            vector=vector,
            residual=residual,
            iterations=iterations,
            method=method,
            perron=perron,
        )

    @staticmethod
    def _spectrum_moduli(a: np.ndarray) -> np.ndarray:
        if a.shape == (2, 2):
            trace = a[0, 0] + a[1, 1]
            # nonnegative 2x2: discriminant (a00 - a11)^2 + 4 a01 a10 >= 0
            root = np.sqrt((a[0, 0] - a[1, 1]) ** 2 + 4.0 * a[0, 1] * a[1, 0])
            values = np.array([(trace + root) / 2.0, (trace - root) / 2.0])
        else:
            values = scipy.linalg.eigvals(a)
        return np.sort(np.abs(values))[::-1]

    def _power_iteration(self, a: np.ndarray, tolerance: float, max_iterations: int) -> Tuple[float, np.ndarray, int]:
        v = np.full(a.shape[0], 1.0 / a.shape[0])
        for iteration in range(1, max_iterations + 1):
            w = a @ v
            total = w.sum()
            if total <= 0.0:
                raise DegenerateSpectrum("iterate vanished; the matrix is nilpotent on the start vector")
            w = w / total
            step = float(np.abs(w - v).sum())
            v = w
            if step < tolerance:
                return float((a @ v).sum()), v, iteration
        raise NonConvergence(
            f"power iteration did not converge within {max_iterations} iterations (last step {step:.3g})",
            {"iterations": max_iterations, "step": step},
        )

    def _direct(self, a: np.ndarray) -> Tuple[float, np.ndarray]:
        if a.shape == (2, 2):
            value = float(self._spectrum_moduli(a)[0])
            row1 = np.array([a[0, 0] - value, a[0, 1]])
            row2 = np.array([a[1, 0], a[1, 1] - value])
            # null vector of the larger row of (A - value I)
            if np.abs(row1).sum() >= np.abs(row2).sum():
                vector = np.array([row1[1], -row1[0]])
            else:
                vector = np.array([row2[1], -row2[0]])
            if np.abs(vector).sum() == 0.0:
                vector = np.array([0.5, 0.5])
        else:
            values, vectors = scipy.linalg.eig(a)
            index = int(np.argmax(values.real))
            value = float(values[index].real)
            vector = vectors[:, index].real
        if vector.sum() < 0.0:
            vector = -vector
        vector = np.clip(vector, 0.0, None)
        return value, ProbUtils.normalize(vector, error_cls=DegenerateSpectrum, what="eigenvector")

    # === Solve ===
    def solve_shared_leaf_pair(
        self,
        net: BayesNet,
        evidence: Evidence,
        orientation: Orientation = "literal",
    ) -> SharedLeafSolution:
        cycle = self.build_cycle_matrix(net, evidence, orientation)
        h1, h2 = cycle.roots
        pair = self.dominant_eigenpair(cycle.a)
        pair_t = self.dominant_eigenpair(cycle.a_t)

        agreement = None
        if cycle.a.shape == (2, 2):
            direct = self.dominant_eigenpair(cycle.a, method="direct")
            direct_t = self.dominant_eigenpair(cycle.a_t, method="direct")
            agreement = max(
                float(np.abs(direct.vector - pair.vector).max()),
                float(np.abs(direct_t.vector - pair_t.vector).max()),
            )

        return SharedLeafSolution(
            beliefs={h1: pair.vector, h2: pair_t.vector},
            completed_beliefs=self.completed_beliefs(cycle),
            cycle=cycle,
            eigenpair=pair,
            transposed_eigenpair=pair_t,
            alpha_report=AlphaReport(
                cycle_eigenvalue=pair.value,
                transposed_cycle_eigenvalue=pair_t.value,
                recursion_alpha=1.0 / pair.value,
                leaf_slice_eigenvalues={
                    leaf: self._slice_eigenvalue(m) for leaf, m in zip(cycle.leaves, cycle.likelihoods)
                },
            ),
            method_agreement=agreement,
        )

    @staticmethod
    def _slice_eigenvalue(matrix: np.ndarray) -> Optional[float]:
        if matrix.shape[0] != matrix.shape[1]:
            return None
        return float(np.max(scipy.linalg.eigvals(matrix).real))

    def completed_beliefs(self, cycle: CycleMatrix) -> Dict[str, np.ndarray]:
        """
        Fixed-point beliefs with the lambdas of both shared leaves, from the two
        message cycles in receiving x sending orientation.
        """
        m1, m2 = cycle.likelihoods
        prior_1, prior_2 = cycle.priors
        d1, d2 = np.diag(prior_1), np.diag(prior_2)

        pi_11 = self.dominant_eigenpair(d1 @ m2 @ d2 @ m1.T).vector
        pi_12 = self.dominant_eigenpair(d1 @ m1 @ d2 @ m2.T).vector

        lambda_12 = ProbUtils.normalize(m1.T @ pi_11, what="lambda E1 -> h2")
        pi_22 = ProbUtils.normalize(prior_2 * lambda_12, what="pi h2 -> E2")
        lambda_21 = ProbUtils.normalize(m2 @ pi_22, what="lambda E2 -> h1")

        lambda_22 = ProbUtils.normalize(m2.T @ pi_12, what="lambda E2 -> h2")
        pi_21 = ProbUtils.normalize(prior_2 * lambda_22, what="pi h2 -> E1")
        lambda_11 = ProbUtils.normalize(m1 @ pi_21, what="lambda E1 -> h1")

        h1, h2 = cycle.roots
        return {
            h1: ProbUtils.normalize(prior_1 * lambda_11 * lambda_21, what=f"belief of '{h1}'"),
            h2: ProbUtils.normalize(prior_2 * lambda_12 * lambda_22, what=f"belief of '{h2}'"),
        }

    def fixed_point_residual(self, cycle: CycleMatrix, candidate: Sequence[float]) -> float:
        c = np.asarray(candidate, dtype=float)
        if c.shape != (cycle.a.shape[0],):
            raise DimensionMismatch(
                f"candidate has {c.size} states, cycle matrix has {cycle.a.shape[0]}",
                {"expected": cycle.a.shape[0], "got": c.size},
            )
        image = ProbUtils.normalize(cycle.a @ c, error_cls=DimensionMismatch, what="cycle image")
        return ProbUtils.l1_distance(image, c)

    def iterate_message_cycle(
        self,
        cycle: CycleMatrix,
        tolerance: Optional[float] = None,
        max_iterations: Optional[int] = None,
    ) -> MessageCycleTrace:
        """pi_11 -> lambda_12 -> pi_22 -> lambda_21 -> pi_11, normalizing every message."""
        settings = get_solver_settings()
        tolerance = settings.power_tolerance if tolerance is None else tolerance
        max_iterations = settings.max_iterations if max_iterations is None else max_iterations
        prior_1, prior_2 = cycle.priors

        pi_11 = np.full(cycle.a.shape[0], 1.0 / cycle.a.shape[0])
        step = float("inf")
        for iteration in range(1, max_iterations + 1):
            lambda_12 = ProbUtils.normalize(cycle.p1 @ pi_11, what="lambda_12")
            pi_22 = ProbUtils.normalize(prior_2 * lambda_12, what="pi_22")
            lambda_21 = ProbUtils.normalize(cycle.p2 @ pi_22, what="lambda_21")
            next_pi = ProbUtils.normalize(prior_1 * lambda_21, what="pi_11")
            step = ProbUtils.l1_distance(next_pi, pi_11)
            pi_11 = next_pi
            if step < tolerance:
                return MessageCycleTrace(
                    pi_11=pi_11,
                    lambda_12=lambda_12,
                    pi_22=pi_22,
                    lambda_21=lambda_21,
                    iterations=iteration,
                    step_distance=step,
                )
        raise NonConvergence(
            f"message cycle did not settle within {max_iterations} iterations (last step {step:.3g})",
            {"iterations": max_iterations, "step": step},
        )


# Global instance
eigen_service = EigenService()
