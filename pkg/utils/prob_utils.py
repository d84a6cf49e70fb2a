from typing import Sequence, Type

import numpy as np

from utils.errors import InconsistentEvidence, RecognetError

ROW_TOLERANCE = 1e-9


class ProbUtils:
    @staticmethod
    def normalize(
        vector: Sequence[float],
        error_cls: Type[RecognetError] = InconsistentEvidence,
        what: str = "vector",
    ) -> np.ndarray:
        """
        L1-normalize a nonnegative vector.
        Args:
            vector: values to normalize
            error_cls: raised when the vector has no mass (or is not finite)
            what: name used in the error message
        Returns:
            float64 array summing to 1
        """
        v = np.asarray(vector, dtype=float)
        total = v.sum()
        if not np.isfinite(total) or total <= 0.0:
            raise error_cls(f"{what} has no probability mass", {"vector": v.tolist()})
        return v / total

    @staticmethod
    def l1_distance(a: Sequence[float], b: Sequence[float]) -> float:
        return float(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)).sum())

    @staticmethod
    def is_distribution(vector: Sequence[float], tolerance: float = ROW_TOLERANCE) -> bool:
        v = np.asarray(vector, dtype=float)
        return bool(np.all(np.isfinite(v)) and np.all(v >= 0.0) and abs(v.sum() - 1.0) <= tolerance)

    @staticmethod
    def one_hot(size: int, index: int) -> np.ndarray:
        v = np.zeros(size)
        v[index] = 1.0
        return v
