from .executor import SweepExecutor
