"""Request models for the HTTP API.

Schemas check surface structure (presence, types, ranges); the semantic
checks on probability tables (shapes, row sums, negativity) stay in the
library so the service and direct library use report identical errors.
"""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class InstancePayload(BaseModel):
    """One channel instance, factor tables as nested lists.

    Axis orders match the on-disk config format:
    p_q[q], p_u1p_given_q[q][u], p_u1c_given_q[q][u],
    p_x1_given_q_u1c_u1p[q][u1c][u1p][x1],
    p_u2c_given_q_u1c_u1p[q][u1c][u1p][u2c],
    p_u2p_given_q_u1c_u1p[q][u1c][u1p][u2p],
    p_x2_given_q_u2c_u2p[q][u2c][u2p][x2],
    channel[x1][x2][y1][y2].
    """

    model_config = ConfigDict(extra="forbid")

    p_q: list
    p_u1p_given_q: list
    p_u1c_given_q: list
    p_x1_given_q_u1c_u1p: list
    p_u2c_given_q_u1c_u1p: list
    p_u2p_given_q_u1c_u1p: list
    p_x2_given_q_u2c_u2p: list
    channel: list
    name: Optional[str] = None


class RandomSpec(BaseModel):
    """Server-side generation of seeded random instances.

    Instance ``i`` is drawn from ``default_rng([seed, i])``, so results
    are reproducible regardless of batch size or request splitting.
    """

    model_config = ConfigDict(extra="forbid")

    count: int = Field(ge=1, le=10_000)
    seed: int = Field(ge=0)
    q_card: int = Field(default=1, ge=1, le=4)


class RatesPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    r1p: float = Field(ge=0)
    r1c: float = Field(ge=0)
    r2c: float = Field(ge=0)
    r2p: float = Field(ge=0)
    rp2c: float = Field(ge=0)
    rp2p: float = Field(ge=0)


class RegionRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    instance: InstancePayload
    system: Literal["dmt", "corrected"]


class CompareRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    instance: InstancePayload


class CompareBatchRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    random: RandomSpec


class IdentitiesRequest(BaseModel):
    """Exactly one of ``instance`` (full report) or ``random`` (batch summary)."""

    model_config = ConfigDict(extra="forbid")

    instance: Optional[InstancePayload] = None
    random: Optional[RandomSpec] = None

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.instance is None) == (self.random is None):
            raise ValueError("provide exactly one of 'instance' or 'random'")
        return self


class SimulateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    instance: InstancePayload
    n: int = Field(ge=1, le=4096)
    rates: RatesPayload
    eps_typ: float = Field(gt=0)
    trials: int = Field(ge=1, le=100_000)
    master_seed: int = Field(ge=0)
    jobs: int = Field(default=1, ge=1, le=64)


class SweepRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    instance: InstancePayload
    n: int = Field(ge=1, le=4096)
    rp2c_values: list[float] = Field(min_length=1)
    trials: int = Field(ge=1, le=100_000)
    master_seed: int = Field(ge=0)
    eps_typ: float = Field(gt=0)
