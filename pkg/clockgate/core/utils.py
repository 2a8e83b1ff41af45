import copy
import math
from typing import Any, Dict, List

import numpy as np

from clockgate.core.exceptions import ConfigError

TWO_PI = 2.0 * math.pi
HZ_SUFFIX = "_2pi_hz"


def from_2pi_hz(value: float) -> float:
    """Frequency in Hz -> angular frequency in rad/s"""
    return TWO_PI * float(value)


def to_2pi_hz(value: float) -> float:
    """Angular frequency in rad/s -> frequency in Hz (display only)"""
    return float(value) / TWO_PI


def ingest_2pi_hz(data: Any, path: str = "") -> Any:
    """
    Recursively replace every `<key>_2pi_hz` entry by `<key>` in rad/s.

    Non-numeric values (for example "auto" or "optimal") are passed through unchanged
    under the base key. Giving both forms of the same key is a config error.
    """
    if isinstance(data, list):
        return [ingest_2pi_hz(item, f"{path}[{i}]") for i, item in enumerate(data)]
    if not isinstance(data, dict):
        return data

    converted: Dict[str, Any] = {}
    for key, value in data.items():
        key = str(key)
        dotted = f"{path}.{key}" if path else key
        if key.endswith(HZ_SUFFIX):
            base = key[: -len(HZ_SUFFIX)]
            if base in data:
                raise ConfigError(f"{dotted}: conflicts with '{base}'", field_path=dotted)
            converted[base] = _scale_frequency(value)
        else:
            converted[key] = ingest_2pi_hz(value, dotted)
    return converted


def _scale_frequency(value: Any) -> Any:
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        return from_2pi_hz(value)
    if isinstance(value, dict):
        return {k: _scale_frequency(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
        isinstance(v, (int, float)) for v in value
    ):
        # [re, im] complex pair
        return [from_2pi_hz(value[0]), from_2pi_hz(value[1])]
    if isinstance(value, str):
        # YAML reads 1e3 (no dot) as a string
        text = value.replace(" ", "")
        for parse in (float, complex):
            try:
                return TWO_PI * parse(text)
            except ValueError:
                continue
    return value


def wrap_angle(angle: float) -> float:
    """Reduce an angle to the half-open interval (-pi, pi]"""
    wrapped = math.remainder(float(angle), TWO_PI)
    if wrapped <= -math.pi:
        wrapped += TWO_PI
    return wrapped


def wrap_phase(angle: float, tolerance: float = 0.0) -> float:
    """
    wrap_angle for reported phases; values within `tolerance` above -pi report as +pi
    """
    wrapped = wrap_angle(angle)
    if wrapped - tolerance <= -math.pi:
        return math.pi
    return wrapped


def unwrap_step(previous: float, current_wrapped: float) -> float:
    """Continue an unwrapped phase with a new wrapped sample"""
    return previous + wrap_angle(current_wrapped - previous)


def format_float(value: float, precision: int = 10) -> str:
    """Deterministic text form used in reports"""
    if value is None:
        return "n/a"
    if isinstance(value, complex):
        return f"{value.real:.{precision}g}{value.imag:+.{precision}g}j"
    return f"{float(value):.{precision}g}"


def exact_float(value: float) -> str:
    """Round-trip exact text form (used in the design key=value block)"""
    return f"{float(value):.17g}"


def get_dotted(data: Dict[str, Any], path: str) -> Any:
    node: Any = data
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"{path}: not found", field_path=path)
        node = node[part]
    return node


def set_dotted(data: Dict[str, Any], path: str, value: Any) -> Dict[str, Any]:
    """
    Return a deep copy of `data` with `path` set to `value`.

    Setting `x_2pi_hz` removes a sibling `x` and vice versa, so the two frequency forms
    never coexist. Intermediate sections must already exist.
    """
    updated = copy.deepcopy(data)
    parts = path.split(".")
    node = updated
    for part in parts[:-1]:
        if not isinstance(node, dict) or part not in node or not isinstance(node[part], dict):
            raise ConfigError(f"{path}: section '{part}' not found", field_path=path)
        node = node[part]
    leaf = parts[-1]
    if leaf.endswith(HZ_SUFFIX):
        node.pop(leaf[: -len(HZ_SUFFIX)], None)
    else:
        node.pop(leaf + HZ_SUFFIX, None)
    node[leaf] = value
    return updated


def linspace_values(start: float, stop: float, count: int) -> List[float]:
    return [float(v) for v in np.linspace(start, stop, int(count))]
