"""
Timing helpers for the pipeline stages.
"""

import logging
import time
from functools import wraps

logger = logging.getLogger(__name__)


def track_stage(func):
    """
    Decorator logging the wall time of a pipeline stage at debug level.
    """

    @wraps(func)
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        logger.debug(f"STAGE: starting {func.__name__}")
        try:
            result = func(*args, **kwargs)
        except Exception:
            duration = time.perf_counter() - start
            logger.debug(f"STAGE: {func.__name__} raised after {duration:.4f}s")
            raise
        duration = time.perf_counter() - start
        logger.debug(f"STAGE: completed {func.__name__} in {duration:.4f}s")
        return result

    return wrapper


class StageTimer:
    """
    Context manager timing a named block. The elapsed time stays available on
    the instance after the block exits.
    """

    def __init__(self, context_name="stage"):
        self.context_name = context_name
        self.start_time = 0.0
        self.elapsed = 0.0

    def __enter__(self):
        self.start_time = time.perf_counter()
        logger.debug(f"STAGE: starting {self.context_name}")
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.elapsed = time.perf_counter() - self.start_time
        status = "failed" if exc_type is not None else "completed"
        logger.info(f"STAGE: {status} {self.context_name} in {self.elapsed:.4f}s")
        return False
