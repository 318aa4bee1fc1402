"""Selection Schemas - 대역폭 파라미터 선택 결과 스키마"""

from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field


class SelectionMethod(str, Enum):
    """선택 방법"""
    LMR = "lmr"
    GL = "gl"


class CandidateScore(BaseModel):
    """후보 하나의 기준값

    ``penalty`` holds pen(gamma) for LMR and V_n(gamma) for GL;
    ``distance_term`` holds the L2 distance to the overfitting reference for
    LMR and A_n(gamma) for GL.
    """
    gamma: float
    criterion: float
    penalty: float
    distance_term: float


class SelectionResult(BaseModel):
    """선택 결과

    ``chosen_gamma`` is a bandwidth h when ``parameter == "h"`` (fixed-h LMR).
    ``beta_hat = (1/gamma - 1)/2`` is a heuristic smoothness read-out for
    gamma grids only (None for fixed h).
    """
    chosen_gamma: float
    method: SelectionMethod
    parameter: str = "gamma"
    n: int = Field(ge=1)
    kernel: str
    per_candidate: List[CandidateScore]
    tie_broken: bool = False
    upsilon: float | None = None
    assumption_ok: bool = True
    beta_hat: Optional[float] = None

    @property
    def chosen_index(self) -> int:
        return [c.gamma for c in self.per_candidate].index(self.chosen_gamma)

    @property
    def criteria(self) -> list[float]:
        return [c.criterion for c in self.per_candidate]
