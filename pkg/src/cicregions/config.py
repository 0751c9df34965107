"""Load and save channel instances as JSON.

An instance file carries one conditional table per factor of the input
law plus the channel itself, as nested lists indexed conditioning-first:

    p_q                      [q]
    p_u1p_given_q            [q][u1p]
    p_u1c_given_q            [q][u1c]
    p_x1_given_q_u1c_u1p     [q][u1c][u1p][x1]
    p_u2c_given_q_u1c_u1p    [q][u1c][u1p][u2c]
    p_u2p_given_q_u1c_u1p    [q][u1c][u1p][u2p]
    p_x2_given_q_u2c_u2p     [q][u2c][u2p][x2]
    channel                  [x1][x2][y1][y2]

Alphabet sizes are read off the array shapes; rows must sum to one
within 1e-12.  An optional "name" string is carried through untouched.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .probability import AuxFactorization, ChannelSpec

_FACTOR_KEYS = (
    "p_q",
    "p_u1p_given_q",
    "p_u1c_given_q",
    "p_x1_given_q_u1c_u1p",
    "p_u2c_given_q_u1c_u1p",
    "p_u2p_given_q_u1c_u1p",
    "p_x2_given_q_u2c_u2p",
    "channel",
)


@dataclass(frozen=True)
class InstanceConfig:
    """A complete channel instance: input factorization plus channel law."""

    aux: AuxFactorization
    channel: ChannelSpec
    name: str | None = None

    @classmethod
    def from_dict(cls, payload: dict) -> "InstanceConfig":
        if not isinstance(payload, dict):
            raise ConfigurationError("instance config must be a JSON object")
        missing = [k for k in _FACTOR_KEYS if k not in payload]
        if missing:
            raise ConfigurationError(f"instance config is missing factor {missing[0]!r}")
        unknown = [k for k in payload if k not in _FACTOR_KEYS and k != "name"]
        if unknown:
            raise ConfigurationError(f"instance config has unknown key {unknown[0]!r}")
        arrays = {}
        for key in _FACTOR_KEYS:
            try:
                arrays[key] = np.asarray(payload[key], dtype=float)
            except (TypeError, ValueError) as exc:
                raise ConfigurationError(f"factor {key!r} is not a numeric array: {exc}") from exc
        aux = AuxFactorization(
            p_q=arrays["p_q"],
            p_u1p=arrays["p_u1p_given_q"],
            p_u1c=arrays["p_u1c_given_q"],
            p_x1=arrays["p_x1_given_q_u1c_u1p"],
            p_u2c=arrays["p_u2c_given_q_u1c_u1p"],
            p_u2p=arrays["p_u2p_given_q_u1c_u1p"],
            p_x2=arrays["p_x2_given_q_u2c_u2p"],
        )
        channel = ChannelSpec(table=arrays["channel"])
        name = payload.get("name")
        if name is not None and not isinstance(name, str):
            raise ConfigurationError("instance name must be a string")
        return cls(aux=aux, channel=channel, name=name)

    def to_dict(self) -> dict:
        out = {
            "p_q": self.aux.p_q.tolist(),
            "p_u1p_given_q": self.aux.p_u1p.tolist(),
            "p_u1c_given_q": self.aux.p_u1c.tolist(),
            "p_x1_given_q_u1c_u1p": self.aux.p_x1.tolist(),
            "p_u2c_given_q_u1c_u1p": self.aux.p_u2c.tolist(),
            "p_u2p_given_q_u1c_u1p": self.aux.p_u2p.tolist(),
            "p_x2_given_q_u2c_u2p": self.aux.p_x2.tolist(),
            "channel": self.channel.table.tolist(),
        }
        if self.name is not None:
            out["name"] = self.name
        return out


def load_instance(path: str | Path) -> InstanceConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read instance file {path}: {exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"instance file {path} is not valid JSON: {exc}") from exc
    return InstanceConfig.from_dict(payload)


def save_instance(config: InstanceConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), sort_keys=True, indent=2) + "\n")
