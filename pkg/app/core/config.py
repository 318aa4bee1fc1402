"""Application Configuration - 환경 변수 로드 및 설정 관리"""

from functools import lru_cache
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """애플리케이션 설정

    Every value can be overridden with a ``WWKDE_``-prefixed environment
    variable or a ``.env`` file; CLI flags override both.
    """

    model_config = SettingsConfigDict(
        env_prefix="WWKDE_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # 애플리케이션 설정
    APP_NAME: str = "wwkde"
    LOG_LEVEL: str = "INFO"

    # 커널 / 후보 격자 설정
    DEFAULT_KERNEL: str = "K1"
    # LMR 기본 격자 (GL 기본은 sqrt_log_gl, lmr_fixed 는 fixed_h_lmr)
    GRID_KIND: Literal["equispaced_lmr", "sqrt_log_gl", "fixed_h_lmr"] = "equispaced_lmr"
    GRID_SIZE: int = Field(default=40, ge=1)
    GAMMA_MAX: float = Field(default=0.5, gt=0.0, le=1.0)

    # Goldenshluger-Lepski tuning constant
    UPSILON: float = Field(default=1.0, ge=0.0)

    # 평가 격자 설정
    EVAL_POINTS: int = Field(default=100, ge=2)
    SELECTION_POINTS: int = Field(default=300, ge=2)
    EXTENSION_SD: float = Field(default=3.0, ge=0.0)

    # 몬테카를로 실험 설정
    REPLICATIONS: int = Field(default=50, ge=2)
    SEED: int = 20190101
    WORKERS: int = Field(default=1, ge=1)

    # 온라인 선택 설정
    ONLINE_GRID_SIZE: int = Field(default=50, ge=1)
    ONLINE_POINTS: int = Field(default=100, ge=2)
    STREAM_SNAPSHOT_EVERY: int = Field(default=0, ge=0)

    # 수치 적분 허용 오차
    QUAD_TOL: float = Field(default=1e-8, gt=0.0)


@lru_cache
def get_settings() -> Settings:
    """설정 인스턴스를 캐싱하여 반환"""
    return Settings()


settings = get_settings()
