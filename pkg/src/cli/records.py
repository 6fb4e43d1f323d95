import math
from typing import Dict

from pydantic import BaseModel, validator

ALLOWED_UNITS = ("s", "ns", "T", "mT", "rad", "s^-1", "s^-1 T^-1", "dimensionless")
SECTIONS = ("inputs", "outputs", "residuals")


class Quantity(BaseModel):
    value: float
    unit: str

    @validator("value")
    def value_must_be_finite(cls, v):
        if not math.isfinite(v):
            raise ValueError("Recorded values must be finite")
        return v

    @validator("unit")
    def unit_must_be_known(cls, v):
        if v not in ALLOWED_UNITS:
            raise ValueError(f"Unknown unit {v!r}. Must be one of {ALLOWED_UNITS}")
        return v


class RunRecord(BaseModel):
    """
    Inputs, outputs and residuals of one command run, each number with its unit.

    Text form is one ``section.name: value unit`` line per quantity with values at
    17 significant digits, so ``from_text(to_text())`` gives back the same floats.
    """
    command: str
    constants_version: str = ""
    inputs: Dict[str, Quantity] = {}
    outputs: Dict[str, Quantity] = {}
    residuals: Dict[str, Quantity] = {}

    def put(self, section: str, name: str, value: float, unit: str) -> "RunRecord":
        if section not in SECTIONS:
            raise ValueError(f"Unknown record section {section!r}")
        getattr(self, section)[name] = Quantity(value=float(value), unit=unit)
        return self

    def put_complex(self, section: str, name: str, value: complex) -> "RunRecord":
        """Stores a complex amplitude as ``name.re`` and ``name.im``."""
        self.put(section, f"{name}.re", complex(value).real, "dimensionless")
        return self.put(section, f"{name}.im", complex(value).imag, "dimensionless")

    def value(self, section: str, name: str) -> float:
        return getattr(self, section)[name].value

    def to_text(self) -> str:
        lines = [f"command: {self.command}", f"constants_version: {self.constants_version}"]
        for section in SECTIONS:
            for name, quantity in getattr(self, section).items():
                lines.append(f"{section}.{name}: {quantity.value:.17g} {quantity.unit}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunRecord":
        header: Dict[str, str] = {}
        sections: Dict[str, Dict[str, Quantity]] = {s: {} for s in SECTIONS}
        for line in text.splitlines():
            if not line.strip():
                continue
            key, _, rest = line.partition(": ")
            if key in ("command", "constants_version"):
                header[key] = rest
                continue
            section, _, name = key.partition(".")
            if section not in sections:
                raise ValueError(f"Malformed record line: {line!r}")
            number, _, unit = rest.partition(" ")
            sections[section][name] = Quantity(value=float(number), unit=unit)
        if "command" not in header:
            raise ValueError("Record text has no command line")
        return cls(command=header["command"], constants_version=header.get("constants_version", ""), **sections)

    def to_json(self) -> str:
        return self.json(indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        return cls.parse_raw(text)
