"""Bundled reference objects used by tests, the verifier, and the docs."""

from __future__ import annotations

import json
from importlib import resources

from .channels import Channel
from .superchannels import DephasingSuperchannel
from . import serialization

THREE_LEVEL_NPT = "corr3_npt.json"
QUBIT_SIGN_FLIP = "corr2_sign_flip.json"
HADAMARD = "hadamard_channel.json"


def load_fixture(name: str) -> dict:
    text = resources.files(__package__).joinpath("fixtures").joinpath(name).read_text("utf-8")
    return json.loads(text)


def three_level_npt_superchannel() -> DephasingSuperchannel:
    """d=3 correlation matrix whose memory is certifiably entangled (NPT);
    its partial transpose has minimum eigenvalue 1 - sqrt(2)."""
    return serialization.superchannel_from_json(load_fixture(THREE_LEVEL_NPT))


def qubit_sign_flip_superchannel() -> DephasingSuperchannel:
    """Qubit correlation matrix with blocks [[I, -I], [-I, I]] (I = all-ones);
    steers the Hadamard gate to a perfectly distinguishable channel."""
    return serialization.superchannel_from_json(load_fixture(QUBIT_SIGN_FLIP))


def hadamard_channel() -> Channel:
    """The unitary Hadamard gate as a channel."""
    return serialization.channel_from_json(load_fixture(HADAMARD))
