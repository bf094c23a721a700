import hashlib
from multiprocessing import Pool
from typing import Any, Callable, Iterable, List, Optional

import numpy as np


def format_float(x: float) -> str:
  # repr is the shortest string that round-trips to the same double.
  return repr(float(x))


def format_floats(xs: Iterable[float], sep: str = ' ') -> str:
  return sep.join(format_float(x) for x in xs)


def sha256_hex(data: bytes) -> str:
  return hashlib.sha256(data).hexdigest()


def array_digest(*arrays: np.ndarray) -> str:
  h = hashlib.sha256()
  for a in arrays:
    h.update(np.ascontiguousarray(a).tobytes())
  return h.hexdigest()


def ordered_map(fn: Callable[[Any], Any],
                items: Iterable[Any],
                workers: int = 1,
                chunksize: Optional[int] = None) -> List[Any]:
  """
  ``[fn(x) for x in items]``, spread over a process pool when ``workers`` > 1.
  Results come back in item order whatever the worker count.
  """
  items = list(items)
  if workers <= 1 or len(items) < 2:
    return [fn(x) for x in items]
  if chunksize is None:
    chunksize = max(1, len(items) // (4 * workers))
  with Pool(processes=workers) as pool:
    return pool.map(fn, items, chunksize=chunksize)
