import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

from config import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def map_points(fn: Callable[[T], R], points: Iterable[T], workers: int = None) -> List[R]:
    """Apply fn to every sweep point, in input order, on up to `workers` threads"""
    points = list(points)
    workers = workers or settings.sweep_workers
    if workers <= 1 or len(points) <= 1:
        return [fn(p) for p in points]

    logger.debug(f"Running {len(points)} sweep points on {workers} workers")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, points))
