"""
Logging decorators for the numerical entry points.

log_call records each call and its result at DEBUG level; elapsed_time
records the wall time of the expensive oracle and Green-function routines.
Both go through the module logger of the decorated function, so
`fspd.py -v` turns them on for the whole library.
"""

import functools
import logging
import time


def log_call(func):
    logger = logging.getLogger(func.__module__)

    @functools.wraps(func)
    def f_wrapper(*args, **kwargs):
        logger.debug("Calling %s with args: %s, kwargs: %s", func.__name__, args, kwargs)
        result = func(*args, **kwargs)
        logger.debug("%s finished. Result: %s", func.__name__, result)
        return result
    return f_wrapper


def elapsed_time(func):
    logger = logging.getLogger(func.__module__)

    @functools.wraps(func)
    def f_wrapper(*args, **kwargs):
        t_start = time.perf_counter()
        result = func(*args, **kwargs)
        t_elapsed = time.perf_counter() - t_start
        logger.info("%s execution time: %.4f seconds", func.__name__, t_elapsed)
        return result
    return f_wrapper
