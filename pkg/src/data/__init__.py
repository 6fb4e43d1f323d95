from .registry import ConstantEntry, ConstantsRegistry, clear_cache, load_registry
