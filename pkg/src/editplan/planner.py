"""Forward-search operation planning with beam search and backtracking.

Given an input image and a cost function (usually L1 distance to a target
image), the planner expands each beam state by every unused operation,
optimizing that operation's parameters with Nelder-Mead, keeps the B
cheapest candidates, and stops when the cost drops below the threshold or
the step budget runs out. Parameter optimization starts from the identity
point (or, for the curve operations, from a least-squares curve fit when it
beats identity), so a planned step can never increase the cost.

Variants: fixed operation order (chain instead of beam), epsilon-greedy
beam slot selection, and mask-restricted local editing where each
expansion also enumerates a set of binary region masks.
"""

import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import ops
from .cost import make_cost, reward
from .image import validate_image, validate_mask
from .optimize import OptimizerConfig, nelder_mead


class PlanFormatError(ValueError):
    """Raised for malformed plan files."""


class BoundaryParameterError(ValueError):
    """Raised when finite differences would step outside parameter bounds."""


@dataclass
class PlannerConfig:
    max_steps: int = 6
    beam_size: int = 8
    epsilon: float = 0.01
    op_set: tuple = ops.ALL_OPS
    order_mode: str = "searched"  # "searched" | "fixed"
    egreedy_prob: float = 0.0
    rng_seed: int = 0
    no_repeat: bool = True
    cost_name: str = "l1"
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    # A step whose best candidate improves the cost by less than this is
    # dropped and planning stops: trailing no-op edits are supervision noise.
    min_improvement: float = 1e-7

    def __post_init__(self):
        self.op_set = tuple(
            ops.op_from_name(o) if isinstance(o, str) else o for o in self.op_set
        )
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.beam_size < 1:
            raise ValueError("beam_size must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if not self.op_set:
            raise ValueError("op_set must be nonempty")
        if not 0.0 <= self.egreedy_prob <= 1.0:
            raise ValueError("egreedy_prob must lie in [0, 1]")
        if self.egreedy_prob > 0 and self.order_mode != "searched":
            raise ValueError("egreedy_prob requires order_mode='searched'")
        if self.order_mode not in ("searched", "fixed"):
            raise ValueError(f"unknown order_mode {self.order_mode!r}")

    def to_dict(self):
        return {
            "max_steps": self.max_steps,
            "beam_size": self.beam_size,
            "epsilon": self.epsilon,
            "op_set": [op.value for op in self.op_set],
            "order_mode": self.order_mode,
            "egreedy_prob": self.egreedy_prob,
            "rng_seed": self.rng_seed,
            "no_repeat": self.no_repeat,
            "cost_name": self.cost_name,
        }

    @classmethod
    def from_dict(cls, d):
        known = {
            "max_steps", "beam_size", "epsilon", "op_set", "order_mode",
            "egreedy_prob", "rng_seed", "no_repeat", "cost_name",
        }
        return cls(**{k: v for k, v in d.items() if k in known})


@dataclass
class PlanStep:
    op: ops.OpKind
    params: np.ndarray
    cost_after: float
    mask_index: int | None = None


@dataclass
class Plan:
    steps: list
    initial_cost: float
    final_cost: float
    terminated_by: str  # "threshold" | "budget"
    config: PlannerConfig
    n_optimizations: int = 0  # bookkeeping, not serialized

    def __len__(self):
        return len(self.steps)


@dataclass
class LocalPlan(Plan):
    mask_paths: list = field(default_factory=list)
    masks: list = field(default_factory=list)  # mask arrays, for replay


class _Node:
    __slots__ = ("image", "cost", "parent", "action", "used", "depth")

    def __init__(self, image, cost, parent=None, action=None, used=frozenset(), depth=0):
        self.image = image
        self.cost = cost
        self.parent = parent
        self.action = action  # (op, params, mask_index) or None for root
        self.used = used
        self.depth = depth


def _assert_deterministic(cost_fn, image):
    c0 = cost_fn(image)
    if cost_fn(image) != c0:
        raise ValueError("cost function is not deterministic")
    return c0


def _backtrack(node):
    steps = []
    while node.parent is not None:
        op, params, mask_index = node.action
        steps.append(PlanStep(op=op, params=params, cost_after=node.cost,
                              mask_index=mask_index))
        node = node.parent
    steps.reverse()
    return steps


def _curve_seed(op, image, cost_fn, mask, space):
    """Data-driven Nelder-Mead start for the curve operations.

    When the cost exposes a target image of matching shape, the curve
    weights are seeded from a least-squares fit of current-to-target channel
    values (restricted to the mask region, if any). Returns None when no
    seed is available, in which case optimization starts from identity.
    """
    if op not in (ops.OpKind.TONE, ops.OpKind.COLOR):
        return None
    target = getattr(cost_fn, "target", None)
    if target is None or np.shape(target) != np.shape(image):
        return None
    if mask is not None:
        sel = mask > 0.5
        if not np.any(sel):
            return None
        src, dst = image[sel], target[sel]
    else:
        src, dst = image, target
    if op is ops.OpKind.TONE:
        seed = ops.fit_curve_weights(src, dst)
        if seed is None:
            return None
    else:
        parts = []
        for c in range(3):
            w = ops.fit_curve_weights(src[..., c], dst[..., c])
            if w is None:
                return None
            parts.append(w)
        seed = np.concatenate(parts)
    return space.clip(seed)


def _expand(node, slot, cost_fn, cfg, mask_candidates, counter):
    """Optimize every unused (op, mask) candidate from this beam node.

    Returns (child, sort_key) pairs; keys are (cost, op index, parent slot,
    mask index) for reproducible tie-breaking.
    """
    out = []
    for oi, op in enumerate(cfg.op_set):
        space = ops.DEFAULT_SPACES[op]
        for mi, mask in mask_candidates:
            key = (op, mi)
            if cfg.no_repeat and key in node.used:
                continue

            if mask is None:
                def objective(p, _op=op, _img=node.image):
                    return cost_fn(ops.apply(_op, _img, p))
            else:
                def objective(p, _op=op, _img=node.image, _m=mask):
                    return cost_fn(ops.apply_masked(_op, _img, p, _m))

            seed = _curve_seed(op, node.image, cost_fn, mask, space)
            start = None
            if seed is not None and objective(seed) < objective(space.identity):
                start = seed
            best_p, best_f = nelder_mead(objective, space, start=start,
                                         cfg=cfg.optimizer)
            counter[0] += 1
            if mask is None:
                image = ops.apply(op, node.image, best_p)
            else:
                image = ops.apply_masked(op, node.image, best_p, mask)
            child = _Node(
                image=image,
                cost=best_f,
                parent=node,
                action=(op, best_p, mi),
                used=node.used | {key},
                depth=node.depth + 1,
            )
            out.append((child, (best_f, oi, slot, -1 if mi is None else mi)))
    return out


def _select_beam(scored, beam_size, rng, egreedy_prob):
    """Keep the B cheapest children; with epsilon-greedy, each beam slot may
    instead take a uniformly random remaining child."""
    scored = sorted(scored, key=lambda t: t[1])
    if egreedy_prob <= 0.0 or rng is None:
        return [c for c, _ in scored[:beam_size]]
    remaining = list(scored)
    picked = []
    while remaining and len(picked) < beam_size:
        if rng.random() < egreedy_prob:
            idx = int(rng.integers(len(remaining)))
        else:
            idx = 0
        picked.append(remaining.pop(idx)[0])
    return picked


def _search(input_img, cost_fn, cfg, mask_candidates, use_rng):
    input_img = validate_image(input_img)
    initial_cost = _assert_deterministic(cost_fn, input_img)
    counter = [0]
    rng = np.random.default_rng(cfg.rng_seed) if use_rng else None

    root = _Node(image=input_img, cost=initial_cost)
    if initial_cost < cfg.epsilon:
        return root, initial_cost, "threshold", counter[0]

    beam = [root]
    best = root
    terminated_by = "budget"
    for _t in range(cfg.max_steps):
        scored = []
        for slot, node in enumerate(beam):
            scored.extend(_expand(node, slot, cost_fn, cfg, mask_candidates, counter))
        if not scored:
            break
        selected = _select_beam(scored, cfg.beam_size, rng, cfg.egreedy_prob)
        min_child = min(selected, key=lambda n: n.cost)
        if min_child.cost < cfg.epsilon:
            best = min_child
            terminated_by = "threshold"
            break
        if min_child.cost >= best.cost - cfg.min_improvement:
            break
        beam = selected
        best = min_child
    return best, initial_cost, terminated_by, counter[0]


def plan(input_img, cost_fn, cfg=None):
    """Plan an operation sequence minimizing `cost_fn`, per the beam search.

    With cfg.order_mode == "fixed" this delegates to `plan_fixed_order`;
    with cfg.egreedy_prob > 0 beam selection draws from the seeded RNG.
    """
    cfg = cfg or PlannerConfig()
    if cfg.order_mode == "fixed":
        return plan_fixed_order(input_img, cost_fn, cfg)
    best, initial_cost, terminated_by, n_opt = _search(
        input_img, cost_fn, cfg, [(None, None)], use_rng=cfg.egreedy_prob > 0
    )
    return Plan(
        steps=_backtrack(best),
        initial_cost=initial_cost,
        final_cost=best.cost,
        terminated_by=terminated_by,
        config=cfg,
        n_optimizations=n_opt,
    )


def plan_fixed_order(input_img, cost_fn, cfg=None):
    """Apply the configured operations in order, one optimized step each.

    Operations whose optimized step fails to improve the cost are skipped.
    """
    cfg = cfg or PlannerConfig(order_mode="fixed")
    input_img = validate_image(input_img)
    initial_cost = _assert_deterministic(cost_fn, input_img)
    steps = []
    image = input_img
    current = initial_cost
    terminated_by = "budget"
    n_opt = 0
    if initial_cost < cfg.epsilon:
        terminated_by = "threshold"
    else:
        for op in cfg.op_set[: cfg.max_steps]:
            space = ops.DEFAULT_SPACES[op]

            def objective(p, _op=op, _img=image):
                return cost_fn(ops.apply(_op, _img, p))

            seed = _curve_seed(op, image, cost_fn, None, space)
            start = None
            if seed is not None and objective(seed) < objective(space.identity):
                start = seed
            best_p, best_f = nelder_mead(objective, space, start=start,
                                         cfg=cfg.optimizer)
            n_opt += 1
            if best_f >= current - cfg.min_improvement:
                continue
            image = ops.apply(op, image, best_p)
            current = best_f
            steps.append(PlanStep(op=op, params=best_p, cost_after=best_f))
            if current < cfg.epsilon:
                terminated_by = "threshold"
                break
    return Plan(
        steps=steps,
        initial_cost=initial_cost,
        final_cost=current,
        terminated_by=terminated_by,
        config=cfg,
        n_optimizations=n_opt,
    )


def plan_egreedy(input_img, cost_fn, cfg):
    """Beam planning with epsilon-greedy slot selection (seeded, reproducible)."""
    if cfg.order_mode != "searched":
        raise ValueError("epsilon-greedy planning requires order_mode='searched'")
    return plan(input_img, cost_fn, cfg)


def _mask_candidates(masks, image_shape):
    cands = []
    all_ones_present = False
    for i, m in enumerate(masks):
        m = validate_mask(m)
        if m.shape != image_shape[:2]:
            raise ValueError(
                f"mask {i} shape {m.shape} does not match image {image_shape[:2]}"
            )
        if np.all(m == 1.0):
            all_ones_present = True
        cands.append((i, m))
    if not all_ones_present:
        # Keep global edits available alongside the region masks.
        cands.append((len(masks), np.ones(image_shape[:2])))
    return cands


def _padded_paths(mask_paths, n_candidates):
    paths = list(mask_paths) if mask_paths else []
    # The implicit all-ones candidate, when appended, has no backing file.
    paths.extend([None] * (n_candidates - len(paths)))
    return paths


def plan_local(input_img, cost_fn, masks, cfg=None, mask_paths=None):
    """Mask-restricted planning: each expansion also enumerates region masks.

    An all-ones mask is appended to the candidates unless one is already
    present. The no-repeat constraint applies per (operation, mask) pair.
    """
    cfg = cfg or PlannerConfig()
    if not masks:
        raise ValueError("plan_local requires at least one mask")
    input_img = validate_image(input_img)
    cands = _mask_candidates(masks, input_img.shape)
    best, initial_cost, terminated_by, n_opt = _search(
        input_img, cost_fn, cfg, cands, use_rng=cfg.egreedy_prob > 0
    )
    return LocalPlan(
        steps=_backtrack(best),
        initial_cost=initial_cost,
        final_cost=best.cost,
        terminated_by=terminated_by,
        config=cfg,
        n_optimizations=n_opt,
        mask_paths=_padded_paths(mask_paths, len(cands)),
        masks=[m for _, m in cands],
    )


def replay(input_img, a_plan, masks=None):
    """Re-execute a plan's steps in order on `input_img`."""
    image = validate_image(input_img)
    if masks is None:
        masks = getattr(a_plan, "masks", None)
    for step in a_plan.steps:
        if step.mask_index is None:
            image = ops.apply(step.op, image, step.params)
        else:
            if not masks:
                raise ValueError("plan has masked steps but no masks were given")
            image = ops.apply_masked(step.op, image, step.params,
                                     masks[step.mask_index])
    return image


# ---------------------------------------------------------------------------
# Plan file format (JSON)

def plan_to_dict(a_plan):
    d = {
        "version": 1,
        "initial_cost": a_plan.initial_cost,
        "final_cost": a_plan.final_cost,
        "terminated_by": a_plan.terminated_by,
        "config": a_plan.config.to_dict(),
        "steps": [
            {
                "op": s.op.value,
                "params": [float(v) for v in np.asarray(s.params).ravel()],
                "cost_after": s.cost_after,
                "mask_index": s.mask_index,
            }
            for s in a_plan.steps
        ],
    }
    if isinstance(a_plan, LocalPlan):
        d["masks"] = list(a_plan.mask_paths)
    return d


def plan_to_json(a_plan):
    """Serialize a plan deterministically; floats keep full round-trip precision."""
    return json.dumps(plan_to_dict(a_plan)) + "\n"


def save_plan(a_plan, path):
    with open(path, "w", encoding="utf-8") as f:
        f.write(plan_to_json(a_plan))


def plan_from_dict(d):
    try:
        if d.get("version") != 1:
            raise PlanFormatError(f"unsupported plan version {d.get('version')!r}")
        cfg = PlannerConfig.from_dict(d["config"])
        steps = []
        for s in d["steps"]:
            op = ops.op_from_name(s["op"])
            params = np.asarray(s["params"], dtype=np.float64)
            if params.size != ops.PARAM_DIM[op]:
                raise PlanFormatError(
                    f"step op {op} expects {ops.PARAM_DIM[op]} params, "
                    f"got {params.size}"
                )
            steps.append(PlanStep(op=op, params=params,
                                  cost_after=float(s["cost_after"]),
                                  mask_index=s.get("mask_index")))
        common = dict(
            steps=steps,
            initial_cost=float(d["initial_cost"]),
            final_cost=float(d["final_cost"]),
            terminated_by=d["terminated_by"],
            config=cfg,
        )
        if "masks" in d:
            return LocalPlan(mask_paths=list(d["masks"]), masks=[], **common)
        return Plan(**common)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, PlanFormatError):
            raise
        raise PlanFormatError(f"malformed plan: {exc}") from exc


def load_plan(path):
    try:
        with open(path, encoding="utf-8") as f:
            d = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise PlanFormatError(f"cannot read plan file {path}: {exc}") from exc
    return plan_from_dict(d)


# ---------------------------------------------------------------------------
# Numerical check of the policy-gradient / image-loss equivalence

@dataclass
class DpgReport:
    max_rel_discrepancy: float
    max_abs_discrepancy: float
    gradient_scale: float
    telescope_error: float
    tolerance: float = 1e-3

    @property
    def passed(self):
        return self.max_rel_discrepancy < self.tolerance


def verify_dpg_equivalence(input_img, target, a_plan, fd_step=1e-4):
    """Check numerically that per-step gradients of the remaining accumulated
    reward equal the negative gradient of the final cost.

    Side (a) differentiates G_{t+1} = cost(I_t) - cost(I_T) with respect to
    step t's parameters, re-rolling the remaining operations from the cached
    intermediate image. Side (b) differentiates -cost(I_T) treating all step
    parameters as one concatenated vector rolled from the input image. Both
    use central finite differences of size `fd_step`.
    """
    input_img = validate_image(input_img)
    target = validate_image(target)
    if not a_plan.steps:
        raise ValueError("plan must have at least one step")
    for s in a_plan.steps:
        space = ops.DEFAULT_SPACES[s.op]
        p = np.asarray(s.params, dtype=np.float64)
        if np.any(p - fd_step < space.lower) or np.any(p + fd_step > space.upper):
            raise BoundaryParameterError(
                f"step {s.op} parameters too close to bounds for central "
                f"differences with step {fd_step}"
            )

    cost_fn = make_cost(a_plan.config.cost_name, target)
    steps = a_plan.steps
    n_steps = len(steps)

    def roll(from_image, from_step, override_step=None, override_params=None):
        img = from_image
        for t in range(from_step, n_steps):
            p = override_params if t == override_step else steps[t].params
            img = ops.apply(steps[t].op, img, p)
        return img

    # Cached trajectory.
    images = [input_img]
    for s in steps:
        images.append(ops.apply(s.op, images[-1], s.params))
    costs = [cost_fn(img) for img in images]

    grads_a = []
    grads_b = []
    for t, s in enumerate(steps):
        p = np.asarray(s.params, dtype=np.float64)
        ga = np.empty(p.size)
        gb = np.empty(p.size)
        for j in range(p.size):
            plus = p.copy()
            minus = p.copy()
            plus[j] += fd_step
            minus[j] -= fd_step
            # (a): d G_{t+1} / d alpha_t, rolled from the cached I_t.
            g_plus = costs[t] - cost_fn(roll(images[t], t, t, plus))
            g_minus = costs[t] - cost_fn(roll(images[t], t, t, minus))
            ga[j] = (g_plus - g_minus) / (2.0 * fd_step)
            # (b): -d cost(I_T) / d alpha_t, rolled from the input image.
            c_plus = cost_fn(roll(input_img, 0, t, plus))
            c_minus = cost_fn(roll(input_img, 0, t, minus))
            gb[j] = -(c_plus - c_minus) / (2.0 * fd_step)
        grads_a.append(ga)
        grads_b.append(gb)

    a = np.concatenate(grads_a)
    b = np.concatenate(grads_b)
    scale = max(float(np.max(np.abs(b))), 1e-8)
    max_abs = float(np.max(np.abs(a - b)))

    rewards = [reward(costs[t], costs[t + 1]) for t in range(n_steps)]
    telescope_error = abs(sum(rewards) - (costs[0] - costs[-1]))

    return DpgReport(
        max_rel_discrepancy=max_abs / scale,
        max_abs_discrepancy=max_abs,
        gradient_scale=scale,
        telescope_error=telescope_error,
    )
