"""
Defaults for the fspd command line, read from the environment.

Every flag of fspd.py can be preset through an FSPD_-prefixed variable,
e.g. FSPD_ALPHA=1.7, FSPD_X_GRID=-2:2:0.1 or FSPD_FORMAT=json. Explicit
flags win.
"""

from typing import Literal, Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class FspdSettings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="FSPD_", frozen=True)

    # Model
    alpha: Optional[float] = None
    gamma: Optional[float] = None
    sigma: Optional[float] = None
    theta: Optional[float] = None

    # Contract
    spot: Optional[float] = None
    strike: Optional[float] = None
    rate: float = 0.0
    dividend: float = 0.0
    maturity: Optional[float] = None

    # Series truncation and the mu route
    tol: float = Field(1e-6, gt=0)
    max_index: int = Field(64, ge=2)
    route: Literal["series", "mb", "subordination", "closed_form"] = "series"

    # table
    max_n: int = Field(7, ge=0)
    max_m: int = Field(7, ge=1)

    # green
    t: float = Field(1.0, gt=0)
    x_grid: str = "-1:1:0.25"
    scale: Optional[float] = Field(None, gt=0)

    # smile and batch
    strikes: Optional[str] = None
    input: Optional[str] = None
    output: Optional[str] = None
    workers: int = Field(4, ge=1)

    format: Literal["text", "json", "csv"] = "text"
    verbose: bool = False
