"""Output envelope shared by the CLI, and schema loading/validation."""

from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources
from typing import Any

import jsonschema

from . import __version__

SCHEMA_VERSION = "1"


def rational(x: Fraction) -> dict:
    return {"exact": f"{x.numerator}/{x.denominator}", "decimal": float(x)}


def render(obj: Any) -> Any:
    """Recursively replace Fractions by ``{"exact": "p/q", "decimal": ...}``."""
    if isinstance(obj, Fraction):
        return rational(obj)
    if isinstance(obj, dict):
        return {k: render(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [render(v) for v in obj]
    return obj


def output_record(command: str, inputs: dict, results: Any) -> dict:
    return {
        "command": command,
        "inputs": render(inputs),
        "results": render(results),
        "provenance": f"qregen {__version__} (schema {SCHEMA_VERSION})",
    }


def load_schema(name: str) -> dict:
    text = resources.files("qregen.schemas").joinpath(f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(instance: Any, name: str) -> list[str]:
    """Schema violations as ``path: message`` strings, empty when valid."""
    validator = jsonschema.Draft202012Validator(load_schema(name))
    # best_match descends into oneOf/anyOf branches to name the offending field
    errors = [jsonschema.exceptions.best_match([e]) for e in validator.iter_errors(instance)]
    errors.sort(key=lambda e: [str(p) for p in e.absolute_path])
    return [f"{'/'.join(str(p) for p in e.absolute_path) or '<root>'}: {e.message}" for e in errors]
