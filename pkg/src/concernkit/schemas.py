"""Request bodies for the HTTP service.

Validation here is purely structural (types, required fields, ranges).
Anything that needs the theory to judge, like unknown concern ids or literals
outside the fluent universe, is left to the engine so that the error carries
the engine's own diagnostic code.
"""
from __future__ import annotations

from typing import Any, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator


class SessionCreate(BaseModel):
    model_config = ConfigDict(extra="forbid")

    document: dict[str, Any]


class SatisfactionQuery(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mode: Optional[str] = None
    set: Optional[list[str]] = None  # literal overrides on the session state


class TrustQuery(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mode: Optional[str] = None
    set: Optional[list[str]] = None


class MitigateQuery(BaseModel):
    """Search for mitigations, or score an explicit list of plans.

    When ``plans`` is given the search is skipped and the listed plans are
    evaluated as-is (the horizon is not needed then); otherwise ``horizon``
    bounds the plan length of the search.
    """

    model_config = ConfigDict(extra="forbid")

    concerns: list[str] = Field(min_length=1)
    horizon: Optional[int] = Field(default=None, ge=0)
    mode: Optional[str] = None
    minimal: bool = False
    policy: Optional[str] = None
    plans: Optional[list[list[str]]] = None
    weights: Optional[dict[str, Union[int, str]]] = None
    priority: Optional[list[str]] = None
    set: Optional[list[str]] = None

    @model_validator(mode="after")
    def _horizon_or_plans(self):
        if self.plans is None and self.horizon is None:
            raise ValueError("horizon is required unless plans are given")
        return self


class NoncomplianceQuery(BaseModel):
    model_config = ConfigDict(extra="forbid")

    sa: list[str]
    sc: list[str] = Field(min_length=1)
    n: int = Field(ge=0)
    mode: str = "weak"  # weak | strong
    evaluation_mode: Optional[str] = None


class LosQuery(BaseModel):
    model_config = ConfigDict(extra="forbid")

    weights: Optional[dict[str, Union[int, str]]] = None
    priority: Optional[list[str]] = None
    mode: Optional[str] = None
    set: Optional[list[str]] = None


class WhatIf(BaseModel):
    model_config = ConfigDict(extra="forbid")

    set: list[str] = Field(min_length=1)
    mode: Optional[str] = None


class Apply(BaseModel):
    """Commit a plan (optionally on top of literal overrides) to the session.

    ``branch`` picks among multiple final states by canonical index; it is
    required exactly when the outcome is ambiguous.
    """

    model_config = ConfigDict(extra="forbid")

    plan: list[str]
    branch: Optional[int] = Field(default=None, ge=0)
    set: Optional[list[str]] = None
