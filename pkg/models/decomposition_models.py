from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

# top to bottom
DEFAULT_LEVELS = ("object", "sub-assembly", "volume-primitive", "surface", "region", "edge")


class PartSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str
    level: str
    label: Optional[str] = None
    state_labels: Tuple[str, ...] = ("present", "absent")
    prior: Optional[Tuple[float, ...]] = None
    # explicit CPT rows; overrides anything generated from links
    table: Optional[Tuple[Tuple[float, ...], ...]] = None

    @property
    def cardinality(self) -> int:
        return len(self.state_labels)


class LinkSpec(BaseModel):
    """Single-parent predictive arc: p(child present | parent present / otherwise)."""

    model_config = ConfigDict(frozen=True)

    parent: str
    child: str
    detection: float = Field(0.9, ge=0.0, le=1.0)
    false_alarm: float = Field(0.05, ge=0.0, le=1.0)


class SharedChildSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    child: str
    parents: Tuple[str, ...]
    relation: Literal["exclusion", "coincidence", "table"] = "table"
    epsilon: Optional[float] = None
    # e.g. "same-location exclusion": same cpt shape, different reading
    meaning: Optional[str] = None


class DecompositionSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    levels: Tuple[str, ...] = DEFAULT_LEVELS
    parts: Tuple[PartSpec, ...]
    links: Tuple[LinkSpec, ...] = ()
    shared_children: Tuple[SharedChildSpec, ...] = ()

    def part_ids(self) -> List[str]:
        return [p.id for p in self.parts]
