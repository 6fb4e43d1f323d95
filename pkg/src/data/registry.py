import logging
import math
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel, validator

from src.config import settings

logger = logging.getLogger(__name__)

DEFAULT_CONSTANTS_PATH = Path(__file__).with_name("constants.json")


class ConstantEntry(BaseModel):
    """
    One physical constant: numeric value in canonical units plus its unit string and source tag.
    """
    name: str
    value: float
    unit: str
    source: str
    description: str = ""

    @validator("value")
    def value_must_be_finite(cls, v):
        if not math.isfinite(v):
            raise ValueError("Constant value must be finite")
        return v


class ConstantsRegistry(BaseModel):
    """
    Versioned set of constants loaded from a JSON file.
    """
    version: str
    constants: List[ConstantEntry]

    @validator("constants")
    def names_must_be_unique(cls, v):
        names = [entry.name for entry in v]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ValueError(f"Duplicate constant names: {duplicates}")
        return v

    def entry(self, name: str) -> ConstantEntry:
        for item in self.constants:
            if item.name == name:
                return item
        raise KeyError(f"Constant {name!r} not in registry version {self.version}")

    def get(self, name: str) -> float:
        return self.entry(name).value

    def as_dict(self) -> Dict[str, float]:
        return {item.name: item.value for item in self.constants}


@lru_cache(maxsize=8)
def _load(path: str) -> ConstantsRegistry:
    registry = ConstantsRegistry.parse_file(path)
    logger.info(f"Loaded constants registry version {registry.version} from {path}")
    return registry


def load_registry(path: Optional[str] = None) -> ConstantsRegistry:
    """
    Loads (and caches) the constants registry.

    Args:
        path: JSON file to read. Defaults to ``settings.constants_path`` and then
            to the packaged ``constants.json``.

    Raises:
        FileNotFoundError: If the file does not exist.
        pydantic.ValidationError: If the file does not match the schema.
    """
    resolved = Path(path or settings.constants_path or DEFAULT_CONSTANTS_PATH).resolve()
    if not resolved.is_file():
        raise FileNotFoundError(f"Constants registry not found: {resolved}")
    return _load(str(resolved))


def clear_cache() -> None:
    """Forgets every loaded registry, e.g. after editing the file on disk."""
    _load.cache_clear()
