import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "DIRICHLET_BALL_THREADS"


def max_workers():
    """Worker cap from DIRICHLET_BALL_THREADS; defaults to 1 (serial)."""
    raw = os.environ.get(ENV_THREADS, "").strip()
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        return 1


def pmap(func, items):
    """Order-preserving map, threaded when the environment allows it."""
    items = list(items)
    workers = min(max_workers(), len(items))
    if workers <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
