"""Sampled audit of the Fenchel-Young inequality ``f(x) + f*_p(y) >= H_p(x, y)``."""

from __future__ import annotations

import math

import numpy as np

from ..functions import FunctionSpec
from ..horoball import h_kernel
from ..report import Report
from ..search import SearchBudget
from .core import conjugate

__all__ = ["fenchel_young_audit"]


def fenchel_young_audit(f: FunctionSpec, p, n_samples: int = 1000, seed: int = 0,
                        budget: SearchBudget | None = None) -> Report:
    """Minimum Fenchel-Young slack over seeded pairs ``(x, y)``.

    Points are drawn in the ball of radius ``budget.sample_radius`` around
    ``p``. The pairs form a product design: ``m = ceil(sqrt(n_samples))``
    points serve both as ``x`` and ``y``, so only ``m`` conjugates are
    needed and the equality pairs ``y = x`` are included. The conjugate is
    the truncated sup without divergence probe; it under-approximates
    ``f*_p``, so a slack below ``-budget.tol`` is a genuine error.
    """
    if n_samples <= 0:
        raise ValueError("n_samples must be positive")
    budget = budget or SearchBudget()
    space = f.space
    p = space.check_point(p)
    m = int(math.ceil(math.sqrt(n_samples)))
    rng = np.random.default_rng(seed)
    pts = space.random_point(rng, m, radius=budget.sample_radius, center=p)

    fx = np.asarray(f(pts), dtype=float)  # (m,)
    fstar = np.empty(m)
    for j in range(m):
        val, _ = conjugate(f, p, pts[j], budget, seed=seed, probe=False)
        fstar[j] = val.value
    pad = (slice(None), None) + (slice(None),) * space.point_ndim
    pad_y = (None, slice(None)) + (slice(None),) * space.point_ndim
    kern = h_kernel(space, p, pts[pad], pts[pad_y])  # (m, m): H_p(x_i, y_j)
    slack = fx[:, None] + fstar[None, :] - kern

    i, j = np.unravel_index(int(np.argmin(slack)), slack.shape)
    worst = float(slack[i, j])
    violations = int(np.sum(slack < -budget.tol))
    return Report(
        name=f"fenchel_young:{f.label}",
        passed=bool(worst >= -budget.tol),
        metrics={"min_slack": worst, "violations": violations, "pairs": m * m,
                 "tol": budget.tol},
        witness={"x": pts[i], "y": pts[j], "f_x": fx[i], "fstar_y": fstar[j],
                 "H_xy": kern[i, j]},
    )
