from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator


def parse_rational(text: str) -> Fraction:
    """``"p/q"`` or ``"p"`` with q > 0; floats and decimals are refused."""
    if not isinstance(text, str):
        raise ValueError(f"rational must be a string, got {type(text).__name__}")
    head, sep, tail = text.strip().partition("/")
    try:
        num = int(head)
        den = int(tail) if sep else 1
    except ValueError:
        raise ValueError(f"not a rational: {text!r}") from None
    if den <= 0:
        raise ValueError(f"denominator must be positive in {text!r}")
    return Fraction(num, den)


def format_rational(value) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


class GeneratorKind(str, Enum):
    PERFECT_SPLIT = "perfect_split"
    CLUSTERED = "clustered"
    NESTED_PAIRS = "nested_pairs"
    RANDOM = "random"
    FROM_FILE = "from_file"


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"
    BOTH = "both"


class ConfigurationFile(BaseModel):
    """On-disk configuration: ``classes[c][i][k]`` is coordinate k of point i of class c."""

    d: int = Field(ge=1)
    r: int = Field(ge=2)
    classes: List[List[List[str]]] = Field(min_length=1)

    @field_validator("classes")
    @classmethod
    def rationals_parse(cls, classes):
        for c, points in enumerate(classes):
            for i, point in enumerate(points):
                for k, value in enumerate(point):
                    try:
                        parse_rational(value)
                    except ValueError as e:
                        raise ValueError(f"classes[{c}][{i}][{k}]: {e}") from None
        return classes

    @model_validator(mode="after")
    def shape_matches(self):
        for c, points in enumerate(self.classes):
            if len(points) != self.r:
                raise ValueError(f"classes[{c}] has {len(points)} points, expected r={self.r}")
            for i, point in enumerate(points):
                if len(point) != self.d:
                    raise ValueError(f"classes[{c}][{i}] has {len(point)} coordinates, expected d={self.d}")
        return self


class ExperimentSpec(BaseModel):
    """Everything one command run needs; ranges are checked before any computation."""

    command: str
    kind: GeneratorKind = GeneratorKind.RANDOM
    N: int = Field(default=4, ge=1)
    r: int = Field(default=2, ge=2)
    d: int = Field(default=2, ge=1)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    config_path: Optional[str] = None
    target: Optional[int] = None
    mode: str = "exact"
    trials: int = Field(default=200, ge=1)
    budget_subsets: Optional[int] = Field(default=None, ge=1)
    budget_families: Optional[int] = Field(default=None, ge=1)
    out: Optional[str] = None
    format: OutputFormat = OutputFormat.JSON

    @field_validator("mode")
    @classmethod
    def known_mode(cls, mode):
        if mode not in ("exact", "monte_carlo"):
            raise ValueError(f"mode must be exact or monte_carlo, got {mode!r}")
        return mode

    @model_validator(mode="after")
    def file_given(self):
        if self.kind is GeneratorKind.FROM_FILE and not self.config_path:
            raise ValueError("kind from_file needs a configuration path")
        if self.kind is GeneratorKind.NESTED_PAIRS and self.r != 2:
            raise ValueError("nested_pairs configurations have r = 2")
        return self


class RunReport(BaseModel):
    command: str
    success: bool
    spec: Dict[str, Any]
    seed: int
    version: str
    results: Dict[str, Any] = Field(default_factory=dict)
    wall_time: float = 0.0
    error: Optional[str] = None
    details: Optional[str] = None
