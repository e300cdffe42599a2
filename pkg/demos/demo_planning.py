"""Recovering an edit sequence from an (input, target) image pair.

Applies a hidden three-step edit to a synthetic photo, then asks the beam
planner to reverse-engineer it. Shows the recovered steps, the cost
trajectory, JSON round-tripping, and replay. Run:

    python3 demos/demo_planning.py
"""

import tempfile
from pathlib import Path

import numpy as np

import editplan as ep


def synthetic_photo(size=64, seed=7):
    rng = np.random.default_rng(seed)
    base = rng.random((4, 4, 3))
    img = ep.resize_bilinear(base, size, size)
    return np.clip(0.15 + 0.7 * img, 0.0, 1.0)


def main():
    img = synthetic_photo()

    # The "ground truth" edit the planner has never seen.
    hidden = [
        (ep.OpKind.BRIGHTNESS, [0.25]),
        (ep.OpKind.CONTRAST, [0.4]),
        (ep.OpKind.TONE, [0.8, 0.9, 1.0, 1.1, 1.2, 1.2, 1.1, 1.0]),
    ]
    target = img
    for kind, params in hidden:
        target = ep.apply(kind, target, params)

    cost = ep.TargetL1Cost(target)
    print(f"initial L1 distance: {cost(img):.5f}")

    result = ep.plan(img, cost)  # defaults: 6 steps max, beam of 8
    print(f"planned {len(result.steps)} steps, "
          f"terminated by {result.terminated_by}:")
    for i, step in enumerate(result.steps):
        p = np.asarray(step.params)
        shown = (f"{p[0]:+.4f}" if p.size == 1
                 else "[" + ", ".join(f"{v:.2f}" for v in p[:4]) + ", ...]")
        print(f"  {i + 1}. {step.op.value:<10} params={shown:<28} "
              f"cost -> {step.cost_after:.5f}")
    print(f"final L1: {result.final_cost:.5f} "
          f"(after {result.n_optimizations} parameter optimizations)")

    # Plans serialize to JSON and replay exactly.
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "plan.json"
        ep.save_plan(result, path)
        loaded = ep.load_plan(path)
        replayed = ep.replay(img, loaded)
        print(f"replayed-from-JSON L1: {ep.l1_cost(replayed, target):.5f} "
              f"(recorded {loaded.final_cost:.5f})")

    # A fixed operation order trades search for speed.
    fixed = ep.plan_fixed_order(img, cost)
    print(f"fixed-order variant final L1: {fixed.final_cost:.5f} "
          f"({[s.op.value for s in fixed.steps]})")


if __name__ == "__main__":
    main()
