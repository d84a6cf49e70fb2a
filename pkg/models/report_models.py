from typing import Dict, List, Optional, Union

from pydantic import BaseModel, Field

DiagnosticValue = Union[float, int, str, bool, List[float], None]


class ExpectationCheck(BaseModel):
    node: str
    expected: List[float]
    actual: List[float]
    status: str  # match | order-mismatch | mismatch


class SolverRun(BaseModel):
    solver: str
    beliefs: Dict[str, List[float]]
    diagnostics: Dict[str, DiagnosticValue] = Field(default_factory=dict)
    expectations: List[ExpectationCheck] = Field(default_factory=list)


class DivergenceRow(BaseModel):
    node: str
    solver_a: str
    solver_b: str
    l1: float


class InferenceReport(BaseModel):
    structure: str
    evidence: Dict[str, int] = Field(default_factory=dict)
    runs: List[SolverRun]
    divergence: Optional[List[DivergenceRow]] = None
    notes: List[str] = Field(default_factory=list)

    def run(self, solver: str) -> SolverRun:
        for run in self.runs:
            if run.solver == solver:
                return run
        raise KeyError(solver)


class ValidationReport(BaseModel):
    valid: bool
    structure: Optional[str] = None
    nodes: int = 0
    arcs: int = 0
    error: Optional[str] = None
