from typing import Any, Dict, Optional


class RecognetError(Exception):
    """Base error. `code` is the stable machine-readable name printed by the CLI."""

    code = "RECOGNET_ERROR"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def one_line(self) -> str:
        text = " ".join(self.message.split())
        return f"error={self.code} message={text}"


# === net-core ===
class CycleDetected(RecognetError):
    code = "CYCLE_DETECTED"


class CptMismatch(RecognetError):
    code = "CPT_MISMATCH"


class UnknownNode(RecognetError):
    code = "UNKNOWN_NODE"


class NoSuchArc(RecognetError):
    code = "NO_SUCH_ARC"


class WouldCreateCycle(RecognetError):
    code = "WOULD_CREATE_CYCLE"


class WrongArity(RecognetError):
    code = "WRONG_ARITY"


class DimensionMismatch(RecognetError):
    code = "DIMENSION_MISMATCH"


# === pearl ===
class NotInstantiated(RecognetError):
    code = "NOT_INSTANTIATED"


class NotPolytree(RecognetError):
    code = "NOT_POLYTREE"


class NotTree(RecognetError):
    code = "NOT_TREE"


class EvidenceOnInternalNode(RecognetError):
    code = "EVIDENCE_ON_INTERNAL_NODE"


class InconsistentEvidence(RecognetError):
    code = "INCONSISTENT_EVIDENCE"


# === eigensolver ===
class NotSharedLeafPair(RecognetError):
    code = "NOT_SHARED_LEAF_PAIR"


class UninstantiatedLeaf(RecognetError):
    code = "UNINSTANTIATED_LEAF"


class NonConvergence(RecognetError):
    code = "NON_CONVERGENCE"


class DegenerateSpectrum(RecognetError):
    code = "DEGENERATE_SPECTRUM"


# === oracle ===
class TooLarge(RecognetError):
    code = "TOO_LARGE"


class ZeroProbabilityEvidence(RecognetError):
    code = "ZERO_PROBABILITY_EVIDENCE"


# === vision-model ===
class LevelViolation(RecognetError):
    code = "LEVEL_VIOLATION"


class BadEpsilon(RecognetError):
    code = "BAD_EPSILON"


# === cli / io ===
class SolverInapplicable(RecognetError):
    code = "SOLVER_INAPPLICABLE"


class BnetParseError(RecognetError):
    code = "PARSE_ERROR"

    def __init__(self, message: str, line: int, details: Optional[Dict[str, Any]] = None):
        super().__init__(f"line {line}: {message}", {"line": line, **(details or {})})
        self.line = line


class ConfigError(RecognetError):
    code = "CONFIG_ERROR"


# === data model ===
class InvalidNode(RecognetError):
    code = "INVALID_NODE"


class InvalidEvidence(RecognetError):
    code = "INVALID_EVIDENCE"
