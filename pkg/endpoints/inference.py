from itertools import combinations
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from models.net_models import BayesNet, Evidence, StructureClass
from models.report_models import (
    DiagnosticValue,
    DivergenceRow,
    ExpectationCheck,
    InferenceReport,
    SolverRun,
    ValidationReport,
)
from services.eigen_service import eigen_service
from services.net_core_service import net_core_service
from services.oracle_service import oracle_service
from services.pearl_service import pearl_service
from services.vision_model_service import vision_model_service
from utils.bnet_format import BnetDocument, BnetFormat
from utils.config_reader import get_solver_settings
from utils.errors import RecognetError, SolverInapplicable, UnknownNode
from utils.prob_utils import ProbUtils

SOLVERS = ("exact", "pearl", "eigen", "eigen-completed", "lambda-only")


# === Documents ===
def load_document(path: Optional[str] = None, text: Optional[str] = None) -> BnetDocument:
    doc = BnetFormat.parse_file(path) if path is not None else BnetFormat.parse(text or "")
    vision_model_service.check_levels(doc)
    return doc


def validate_document(path: Optional[str] = None, text: Optional[str] = None) -> ValidationReport:
    try:
        doc = load_document(path, text)
    except RecognetError as e:
        return ValidationReport(valid=False, error=e.one_line())
    return ValidationReport(
        valid=True,
        structure=net_core_service.classify_structure(doc.net).value,
        nodes=len(doc.net.nodes),
        arcs=len(doc.net.arcs),
    )


# === Solver selection ===
def _internal_evidence(net: BayesNet, evidence: Evidence) -> bool:
    return any(net.children(n) for n in evidence.assignments)


def _eigen_ready(net: BayesNet, evidence: Evidence) -> bool:
    if not net_core_service.is_shared_leaf_pair(net):
        return False
    shared = net_core_service.shared_leaves(net)
    return len(shared) == 2 and all(leaf in evidence for leaf in shared)


def auto_solver(net: BayesNet, evidence: Evidence, queries: Sequence[str] = ()) -> str:
    """Tree -> lambda-only, shared-leaf pair -> eigen, polytree -> pearl, otherwise exact."""
    structure = net_core_service.classify_structure(net)
    if not _internal_evidence(net, evidence):
        if structure == StructureClass.TREE:
            root = net_core_service.roots(net)[0]
            return "lambda-only" if set(queries) <= {root} else "pearl"
        if structure == StructureClass.SHARED_LEAF_PAIR and _eigen_ready(net, evidence):
            return "eigen"
        if net_core_service.is_polytree(net):
            return "pearl"
    return "exact"


def _inapplicable(
    solver: str, reason: str, net: BayesNet, evidence: Evidence, queries: Sequence[str] = ()
) -> SolverInapplicable:
    suggestion = auto_solver(net, evidence, queries)
    return SolverInapplicable(
        f"solver '{solver}' does not apply: {reason}; try --solver {suggestion}",
        {"solver": solver, "suggestion": suggestion},
    )


def default_queries(solver: str, net: BayesNet, evidence: Evidence) -> List[str]:
    if solver in ("eigen", "eigen-completed"):
        return net_core_service.roots(net)
    if solver == "lambda-only":
        return net_core_service.roots(net)[:1]
    return [n for n in net.node_ids if n not in evidence]


# === Solvers ===
def _solve_exact(net: BayesNet, evidence: Evidence, queries: List[str], orientation: str) -> SolverRun:
    beliefs = oracle_service.posteriors(net, evidence, queries)
    return SolverRun(
        solver="exact",
        beliefs={n: v.tolist() for n, v in beliefs.items()},
        diagnostics={
            "joint_entries": int(np.prod([n.cardinality for n in net.nodes])),
            "evidence_probability": oracle_service.evidence_probability(net, evidence),
        },
    )


def _solve_pearl(net: BayesNet, evidence: Evidence, queries: List[str], orientation: str) -> SolverRun:
    if not net_core_service.is_polytree(net):
        raise _inapplicable("pearl", "the net has an undirected cycle", net, evidence, queries)
    state = pearl_service.propagate(net, evidence)
    return SolverRun(
        solver="pearl",
        beliefs={n: state.beliefs[n].tolist() for n in queries},
        diagnostics={"messages": len(state.schedule)},
    )


def _solve_lambda_only(net: BayesNet, evidence: Evidence, queries: List[str], orientation: str) -> SolverRun:
    if not net_core_service.is_tree(net):
        raise _inapplicable("lambda-only", "the net is not a tree", net, evidence, queries)
    root = net_core_service.roots(net)[0]
    if set(queries) - {root}:
        raise _inapplicable("lambda-only", f"it only updates the root '{root}'", net, evidence, queries)
    posterior = pearl_service.lambda_only_update(net, evidence, root)
    return SolverRun(solver="lambda-only", beliefs={root: posterior.tolist()}, diagnostics={"root": root})


def _solve_eigen(net: BayesNet, evidence: Evidence, queries: List[str], orientation: str, completed: bool = False) -> SolverRun:
    name = "eigen-completed" if completed else "eigen"
    if not _eigen_ready(net, evidence):
        raise _inapplicable(name, "it needs a shared-leaf pair with exactly two instantiated shared leaves", net, evidence, queries)
    solution = eigen_service.solve_shared_leaf_pair(net, evidence, orientation)
    beliefs = solution.completed_beliefs if completed else solution.beliefs
    unknown = [q for q in queries if q not in beliefs]
    if unknown:
        raise _inapplicable(name, f"it only reports the hypotheses {list(beliefs)}, not {unknown}", net, evidence, queries)

    cycle = solution.cycle
    trace = eigen_service.iterate_message_cycle(cycle)
    h1 = cycle.roots[0]
    diagnostics: Dict[str, DiagnosticValue] = {
        "orientation": cycle.orientation,
        "cycle_matrix": cycle.a.reshape(-1).tolist(),
        "cycle_eigenvalue": solution.alpha_report.cycle_eigenvalue,
        "transposed_cycle_eigenvalue": solution.alpha_report.transposed_cycle_eigenvalue,
        "alpha.recursion": solution.alpha_report.recursion_alpha,
        "alpha.note": solution.alpha_report.note,
        "power_iterations": solution.eigenpair.iterations,
        "transposed_power_iterations": solution.transposed_eigenpair.iterations,
        "eigen_residual": solution.eigenpair.residual,
        "fixed_point_residual": eigen_service.fixed_point_residual(cycle, solution.beliefs[h1]),
        "message_cycle_iterations": trace.iterations,
        "message_cycle_gap": ProbUtils.l1_distance(trace.pi_11, solution.beliefs[h1]),
        "perron": solution.eigenpair.perron and solution.transposed_eigenpair.perron,
    }
    for leaf, value in solution.alpha_report.leaf_slice_eigenvalues.items():
        diagnostics[f"alpha.leaf_slice_eigenvalue.{leaf}"] = value
    if solution.method_agreement is not None:
        diagnostics["method_agreement"] = solution.method_agreement
    return SolverRun(solver=name, beliefs={q: beliefs[q].tolist() for q in queries}, diagnostics=diagnostics)


SOLVER_FUNCTIONS: Dict[str, Callable[..., SolverRun]] = {
    "exact": _solve_exact,
    "pearl": _solve_pearl,
    "lambda-only": _solve_lambda_only,
    "eigen": _solve_eigen,
    "eigen-completed": lambda net, evidence, queries, orientation: _solve_eigen(net, evidence, queries, orientation, completed=True),
}


def _check_expectations(doc: BnetDocument, run: SolverRun, tolerance: float) -> List[ExpectationCheck]:
    checks = []
    for exp in doc.expectations:
        if exp.solver != run.solver or exp.node not in run.beliefs:
            continue
        expected = np.asarray(exp.values)
        actual = np.asarray(run.beliefs[exp.node])
        if expected.shape != actual.shape:
            status = "mismatch"
        elif np.abs(expected - actual).max() <= tolerance:
            status = "match"
        elif np.abs(np.sort(expected) - np.sort(actual)).max() <= tolerance:
            status = "order-mismatch"
        else:
            status = "mismatch"
        checks.append(ExpectationCheck(node=exp.node, expected=list(exp.values), actual=run.beliefs[exp.node], status=status))
    return checks


def _expectation_notes(run: SolverRun) -> List[str]:
    notes = []
    for check in run.expectations:
        if check.status == "order-mismatch":
            notes.append(
                f"{run.solver}: belief of '{check.node}' matches the reference vector only up to component order "
                f"(reference {check.expected}, computed {[round(v, 4) for v in check.actual]})"
            )
        elif check.status == "mismatch":
            notes.append(f"{run.solver}: belief of '{check.node}' differs from the reference vector {check.expected}")
    return notes


def run_solver(doc: BnetDocument, solver: str, queries: Sequence[str] = (), orientation: str = "literal") -> SolverRun:
    net, evidence = doc.net, doc.evidence
    if solver == "auto":
        solver = auto_solver(net, evidence, queries)
    if solver not in SOLVER_FUNCTIONS:
        raise SolverInapplicable(f"unknown solver '{solver}'; choose from {', '.join(SOLVERS)} or auto", {"solver": solver})
    for q in queries:
        if not net.has_node(q):
            raise UnknownNode(f"unknown query node '{q}'", {"node": q})
    chosen = list(queries) or default_queries(solver, net, evidence)
    run = SOLVER_FUNCTIONS[solver](net, evidence, chosen, orientation)
    run.expectations = _check_expectations(doc, run, get_solver_settings().expect_tolerance)
    return run


def run_inference(doc: BnetDocument, solver: str, queries: Sequence[str] = (), orientation: str = "literal") -> InferenceReport:
    run = run_solver(doc, solver, queries, orientation)
    return InferenceReport(
        structure=net_core_service.classify_structure(doc.net).value,
        evidence=dict(doc.evidence.assignments),
        runs=[run],
        notes=_expectation_notes(run),
    )


def run_comparison(doc: BnetDocument, solvers: Sequence[str], queries: Sequence[str] = (), orientation: str = "literal") -> InferenceReport:
    if len(solvers) < 2:
        raise SolverInapplicable("compare needs at least two solvers", {"solvers": list(solvers)})
    net, evidence = doc.net, doc.evidence
    if not queries:
        resolved = [auto_solver(net, evidence) if s == "auto" else s for s in solvers]
        shared = set(net.node_ids)
        for s in resolved:
            shared &= set(default_queries(s, net, evidence)) if s in SOLVER_FUNCTIONS else set()
        queries = [n for n in net.node_ids if n in shared]
    runs = [run_solver(doc, s, queries, orientation) for s in solvers]

    divergence = []
    for a, b in combinations(runs, 2):
        for node in queries:
            divergence.append(
                DivergenceRow(
                    node=node,
                    solver_a=a.solver,
                    solver_b=b.solver,
                    l1=ProbUtils.l1_distance(a.beliefs[node], b.beliefs[node]),
                )
            )
    notes = [note for run in runs for note in _expectation_notes(run)]
    return InferenceReport(
        structure=net_core_service.classify_structure(net).value,
        evidence=dict(evidence.assignments),
        runs=runs,
        divergence=divergence,
        notes=notes,
    )
