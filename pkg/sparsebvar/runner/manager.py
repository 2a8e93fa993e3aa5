import asyncio
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, List, Optional, Sequence, TypeVar

from sparsebvar.errors import TaskFailures
from sparsebvar.monitor.log import RunLogger
from sparsebvar.monitor.resource import default_workers

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


class RunManager:
    """Runs independent numerical tasks on a thread pool.

    Results come back in input order; failures are collected with their
    indices and raised together once every task has finished.
    """

    def __init__(self, workers: int = 0, run_logger: Optional[RunLogger] = None):
        self.workers = default_workers(workers)
        self.run_logger = run_logger

    async def map(self, fn: Callable[[T], R], items: Sequence[T], label: str = "task") -> List[R]:
        loop = asyncio.get_running_loop()
        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            tasks = [loop.run_in_executor(executor, fn, item) for item in items]
            results = await asyncio.gather(*tasks, return_exceptions=True)

        failures = []
        for index, result in enumerate(results):
            failed = isinstance(result, BaseException)
            if failed:
                failures.append((index, result))
                logger.warning("%s task %d failed: %s", label, index, result)
            if self.run_logger is not None:
                await self.run_logger.log_task_event(
                    label, index, "failed" if failed else "completed",
                    {"error": str(result)} if failed else None
                )

        if failures:
            raise TaskFailures(label, failures)
        return list(results)


def run_tasks(
    fn: Callable[[T], R],
    items: Sequence[T],
    workers: int = 1,
    label: str = "task",
    run_logger: Optional[RunLogger] = None,
) -> List[R]:
    """Synchronous entry point; workers=1 runs in order on the calling thread"""
    items = list(items)
    if workers == 1 or len(items) <= 1:
        results: List[Any] = []
        failures = []
        for index, item in enumerate(items):
            try:
                results.append(fn(item))
            except Exception as exc:
                failures.append((index, exc))
                results.append(None)
        if failures:
            raise TaskFailures(label, failures)
        return results
    return asyncio.run(RunManager(workers, run_logger).map(fn, items, label))
