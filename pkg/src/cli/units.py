"""
Parsers for command-line quantities. Canonical units are seconds, tesla and radians.
"""

import argparse
import math
import re
from typing import Dict, List

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_QUANTITY = re.compile(rf"\s*({_NUMBER})\s*([A-Za-z]*)\s*")
_PI_MULTIPLE = re.compile(r"\s*([-+]?)((?:\d+\.?\d*|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?\s*")

TIME_UNITS: Dict[str, float] = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9}
FIELD_UNITS: Dict[str, float] = {"T": 1.0, "mT": 1e-3, "uT": 1e-6}


def _parse_quantity(text: str, units: Dict[str, float], default_unit: str, kind: str) -> float:
    match = _QUANTITY.fullmatch(text)
    if not match:
        raise argparse.ArgumentTypeError(f"Invalid {kind}: {text!r}")
    number, unit = match.groups()
    unit = unit or default_unit
    if unit not in units:
        raise argparse.ArgumentTypeError(f"Unknown {kind} unit {unit!r} in {text!r}. Use one of {sorted(units)}")
    value = float(number) * units[unit]
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"{kind.capitalize()} must be finite: {text!r}")
    return value


def parse_time(text: str) -> float:
    """'18.91ns' -> 1.891e-08; bare numbers are seconds."""
    return _parse_quantity(text, TIME_UNITS, "s", "time")


def parse_field(text: str) -> float:
    """'4.2mT' -> 0.0042; bare numbers are tesla."""
    return _parse_quantity(text, FIELD_UNITS, "T", "field")


def parse_angle(text: str) -> float:
    """
    Radians, either as a plain number or as a multiple of pi ('pi/4', '-3pi/4', '0.5*pi').
    """
    match = _PI_MULTIPLE.fullmatch(text)
    if match:
        sign, coefficient, denominator = match.groups()
        value = (float(coefficient) if coefficient else 1.0) * math.pi
        if denominator:
            if float(denominator) == 0:
                raise argparse.ArgumentTypeError(f"Division by zero in angle {text!r}")
            value /= float(denominator)
        return -value if sign == "-" else value
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Invalid angle: {text!r}")
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"Angle must be finite: {text!r}")
    return value


def parse_complex(text: str) -> complex:
    """Accepts Python complex literals, with 'i' allowed for the imaginary unit."""
    cleaned = text.strip().replace(" ", "").replace("i", "j")
    try:
        value = complex(cleaned)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Invalid complex number: {text!r}")
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise argparse.ArgumentTypeError(f"Amplitude must be finite: {text!r}")
    return value


def parse_amplitudes(text: str) -> List[complex]:
    """Four complex amplitudes separated by commas, semicolons or whitespace."""
    tokens = [token for token in re.split(r"[,;\s]+", text.strip()) if token]
    if len(tokens) != 4:
        raise argparse.ArgumentTypeError(f"Expected 4 amplitudes, got {len(tokens)}")
    return [parse_complex(token) for token in tokens]
