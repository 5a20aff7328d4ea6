from __future__ import annotations

import enum
from dataclasses import asdict
from dataclasses import dataclass
from typing import Any

from scg_jit.errors import UsageError


class ClassifierKind(str, enum.Enum):
    LR = "lr"
    RF = "rf"
    KNN = "knn"

    @classmethod
    def parse(cls, value: str) -> ClassifierKind:
        try:
            return cls(value.strip().lower())
        except ValueError:
            choices = ", ".join(k.value for k in cls)
            raise UsageError(f"Unknown classifier {value!r} (choose from {choices})") from None


@dataclass(frozen=True)
class ClassifierConfig:
    kind: ClassifierKind
    lr_max_iter: int = 200
    lr_l2: float = 1.0
    rf_trees: int = 100
    rf_max_depth: int = 100
    knn_k: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("lr_max_iter", "rf_trees", "rf_max_depth", "knn_k"):
            if getattr(self, name) <= 0:
                raise UsageError(f"{name} must be positive, got {getattr(self, name)}")
        if self.lr_l2 <= 0:
            raise UsageError(f"lr_l2 must be positive, got {self.lr_l2}")

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["kind"] = self.kind.value
        return d
