import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from src.config import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class SweepExecutor:
    """
    Runs independent parameter-sweep jobs, serially or on a process pool.
    """

    def __init__(self, workers: Optional[int] = None):
        """
        Initializes the SweepExecutor.

        Args:
            workers: Pool size; 1 runs in-process. Defaults to ``settings.workers``.
        """
        self.workers = settings.workers if workers is None else int(workers)
        if self.workers < 1:
            raise ValueError(f"Worker count must be at least 1, got {self.workers}")

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        """
        Applies ``fn`` to every item. Results come back in input order whatever
        the worker count; the first exception raised by a job propagates.

        ``fn`` must be picklable (module-level function or ``functools.partial``)
        when more than one worker is used.
        """
        jobs = list(items)
        if self.workers == 1 or len(jobs) < 2:
            return [fn(job) for job in jobs]

        logger.info(f"Running {len(jobs)} sweep jobs on {self.workers} workers")
        with ProcessPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(fn, jobs))
