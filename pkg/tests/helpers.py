import json
from functools import lru_cache

import numpy as np

from skel2img.formats import PART_NAMES, load_format


@lru_cache(maxsize=None)
def chain_format(J: int):
    """J >= 5 joints in one kinematic chain, split into five consecutive parts."""
    names = [f"j{i}" for i in range(J)]
    bounds = np.linspace(0, J, 6).astype(int)
    parts = {p: names[bounds[k]:bounds[k + 1]] for k, p in enumerate(PART_NAMES)}
    return load_format(json.dumps({
        "format_id": f"chain{J}",
        "joints": [{"id": i, "name": n, "parent": names[i - 1] if i else None}
                   for i, n in enumerate(names)],
        "parts": parts,
        "reference": "j0",
    }))
