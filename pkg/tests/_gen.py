"""Random valid opinions for property tests."""

import numpy as np

from evfusion.evidence import Opinion


def random_opinion(rng: np.random.Generator, k: int, min_u: float = 1e-4) -> Opinion:
    u = max(float(rng.random()) ** 2, min_u)
    w = rng.exponential(size=k)
    w[rng.random(k) < 0.2] = 0.0  # some exact-zero beliefs
    if not w.any():
        w[rng.integers(k)] = 1.0
    return Opinion((1.0 - u) * w / w.sum(), u)


def random_logit_record(rng: np.random.Generator, k: int, modalities=("audio", "video", "text")):
    names = [m for m in modalities if rng.random() < 0.8] or [modalities[0]]
    scale = rng.uniform(0.1, 10.0)
    return {m: rng.normal(rng.uniform(-5, 5), scale, k) for m in names}
