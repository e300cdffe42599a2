"""Bounded derivative-free minimization via the Nelder-Mead simplex.

Box constraints are handled by projection: every trial point is clipped
into the parameter bounds before evaluation. The returned point is the
best point ever evaluated, so the result is never worse than the start
vertex. The routine is fully deterministic.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class OptimizerConfig:
    max_evals: int | None = None  # None -> dimension-based default
    x_tol: float = 1e-4  # simplex diameter, in half-range units
    f_tol: float = 1e-6
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    init_step_frac: float = 0.2  # initial vertex offsets as fraction of half-range

    def __post_init__(self):
        if self.expansion <= self.reflection:
            raise ValueError("expansion coefficient must exceed reflection")
        for name in ("reflection", "expansion", "contraction", "shrink"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} coefficient must be positive")

    def evals_for_dim(self, dim):
        if self.max_evals is not None:
            return max(self.max_evals, dim + 2)
        if dim <= 1:
            return 120
        if dim <= 8:
            return 400
        return 800


def nelder_mead(objective, space, start=None, cfg=None):
    """Minimize `objective` over the box `space`, starting at `start`.

    Returns (best_params, best_value). `start` defaults to the space's
    identity point. Budget exhaustion returns the best point found so far;
    the call never fails.
    """
    cfg = cfg or OptimizerConfig()
    start = space.identity if start is None else np.asarray(start, dtype=np.float64)
    if not space.contains(start):
        raise ValueError("start point outside parameter bounds")
    dim = space.dim
    budget = cfg.evals_for_dim(dim)
    half_range = space.half_range

    best_x = space.clip(start)
    best_f = np.inf
    evals = 0

    def evaluate(x):
        nonlocal best_x, best_f, evals
        x = space.clip(x)
        f = float(objective(x))
        evals += 1
        if f < best_f:
            best_f = f
            best_x = x
        return x, f

    # Initial simplex: the start vertex plus one offset per dimension,
    # stepping a fixed fraction of each component's half-range (flipped
    # inward when the step would leave the box).
    verts = []
    vals = []
    x0, f0 = evaluate(start)
    verts.append(x0)
    vals.append(f0)
    for i in range(dim):
        step = cfg.init_step_frac * half_range[i]
        x = x0.copy()
        if x[i] + step > space.upper[i]:
            step = -step
        x[i] += step
        xi, fi = evaluate(x)
        verts.append(xi)
        vals.append(fi)

    verts = np.array(verts)
    vals = np.array(vals)

    while evals < budget:
        order = np.argsort(vals, kind="stable")
        verts = verts[order]
        vals = vals[order]

        diam = np.max(np.abs(verts - verts[0]) / half_range)
        if diam < cfg.x_tol and vals[-1] - vals[0] < cfg.f_tol:
            break

        centroid = verts[:-1].mean(axis=0)
        xr, fr = evaluate(centroid + cfg.reflection * (centroid - verts[-1]))
        if fr < vals[0]:
            if evals >= budget:
                break
            xe, fe = evaluate(centroid + cfg.expansion * (centroid - verts[-1]))
            if fe < fr:
                verts[-1], vals[-1] = xe, fe
            else:
                verts[-1], vals[-1] = xr, fr
            continue
        if fr < vals[-2]:
            verts[-1], vals[-1] = xr, fr
            continue
        if evals >= budget:
            break
        xc, fc = evaluate(centroid + cfg.contraction * (centroid - verts[-1]))
        if fc < vals[-1]:
            verts[-1], vals[-1] = xc, fc
            continue
        # Shrink toward the best vertex.
        for i in range(1, len(verts)):
            if evals >= budget:
                break
            xi, fi = evaluate(verts[0] + cfg.shrink * (verts[i] - verts[0]))
            verts[i], vals[i] = xi, fi

    return best_x, best_f
