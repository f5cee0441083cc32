"""Bundled channel files for the worked examples and sweeps."""

from __future__ import annotations

from importlib import resources

from .channels import ChannelFamily, WiretapPair
from .errors import ValidationError
from .files import free_parameters, parse_channel_text

PRESETS = (
    "remark-3.1",
    "prop-3.1-example",
    "example-6.1",
    "example-6.2",
    "example-2.1",
    "order-weak",
    "order-strong",
)


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ValidationError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    return resources.files("avwc.data").joinpath(f"{name}.chan").read_text("utf-8")


def preset_parameters(name: str) -> list[str]:
    return free_parameters(preset_text(name))


def load_preset(name: str, **params) -> ChannelFamily | WiretapPair:
    return parse_channel_text(preset_text(name), params or None)
