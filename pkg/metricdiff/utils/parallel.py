import logging
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

log = logging.getLogger(__name__)


def default_workers():
    return max(1, os.cpu_count() or 1)


def pmap(func, items, workers=1, chunksize=4):
    """Ordered map of func over items. Serial for workers <= 1, otherwise
       spread over a process pool; results come back in input order.
    """
    items = list(items)
    if workers is None:
        workers = default_workers()
    if workers <= 1 or len(items) < 2:
        return [func(item) for item in items]
    log.debug('mapping %d tasks over %d workers', len(items), workers)
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(func, items, chunksize=chunksize))


def task_rng(seed, key):
    """Generator for one task, derived from the run seed and an integer key"""
    return np.random.default_rng(np.random.SeedSequence([int(seed)] +
                                                        [int(k) for k in key]))
