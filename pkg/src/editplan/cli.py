"""Command-line surface: plan, apply, batch, metrics, verify-dpg, local-plan.

Structured output is JSON on stdout; human logs go to stderr. The env var
EDIT_PLANNER_LOG sets the log level. Flag values override config-file
values (--config, TOML or JSON), which override built-in defaults.
"""

import argparse
import concurrent.futures
import json
import logging
import os
import statistics
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import metrics as metrics_mod
from . import planner as planner_mod
from .cost import l1_cost, make_cost
from .image import ImageError, load_image, load_mask, resize_bilinear, save_image
from .optimize import OptimizerConfig
from .ops import ALL_OPS, apply as apply_op, op_from_name
from .planner import (
    BoundaryParameterError,
    PlanFormatError,
    PlannerConfig,
    load_plan,
    plan_local,
    plan_to_dict,
    replay,
    save_plan,
    verify_dpg_equivalence,
)

logger = logging.getLogger("editplan")

PLANNER_KEYS = {
    "ops": None,
    "max_steps": 6,
    "beam": 8,
    "eps": 0.01,
    "order": "searched",
    "egreedy_prob": 0.0,
    "seed": 0,
    "downscale": "off",
}
OPTIMIZER_KEYS = {
    "max_evals": None,
    "x_tol": 1e-4,
    "f_tol": 1e-6,
    "reflection": 1.0,
    "expansion": 2.0,
    "contraction": 0.5,
    "shrink": 0.5,
    "init_step_frac": 0.2,
}


def _setup_logging():
    level = os.environ.get("EDIT_PLANNER_LOG", "warning").upper()
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )


def _load_config_file(path):
    if path is None:
        return {}
    with open(path, "rb") as f:
        if str(path).endswith(".toml"):
            return tomllib.load(f)
        return json.load(f)


def _add_planner_flags(p):
    p.add_argument("--config", default=None, help="TOML or JSON config file")
    p.add_argument("--ops", default=argparse.SUPPRESS,
                   help="comma-separated operation names")
    p.add_argument("--max-steps", type=int, default=argparse.SUPPRESS)
    p.add_argument("--beam", type=int, default=argparse.SUPPRESS)
    p.add_argument("--eps", type=float, default=argparse.SUPPRESS)
    p.add_argument("--order", choices=["searched", "fixed"],
                   default=argparse.SUPPRESS)
    p.add_argument("--egreedy-prob", type=float, default=argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--downscale", default=argparse.SUPPRESS,
                   help="plan on a copy downscaled to this long side, or 'off'")
    p.add_argument("--cost", default=argparse.SUPPRESS,
                   help="cost function name (l1 or l2)")
    p.add_argument("--optimizer-max-evals", type=int, default=argparse.SUPPRESS)
    p.add_argument("--optimizer-x-tol", type=float, default=argparse.SUPPRESS)
    p.add_argument("--optimizer-f-tol", type=float, default=argparse.SUPPRESS)
    p.add_argument("--optimizer-reflection", type=float, default=argparse.SUPPRESS)
    p.add_argument("--optimizer-expansion", type=float, default=argparse.SUPPRESS)
    p.add_argument("--optimizer-contraction", type=float, default=argparse.SUPPRESS)
    p.add_argument("--optimizer-shrink", type=float, default=argparse.SUPPRESS)
    p.add_argument("--optimizer-init-step-frac", type=float,
                   default=argparse.SUPPRESS)


def _resolve(args):
    """Merge defaults <- config file <- CLI flags into one settings dict."""
    file_cfg = _load_config_file(getattr(args, "config", None))
    settings = dict(PLANNER_KEYS)
    settings["cost"] = "l1"
    opt = dict(OPTIMIZER_KEYS)
    for k, v in file_cfg.items():
        if k == "optimizer":
            for ok, ov in v.items():
                if ok in opt:
                    opt[ok] = ov
        elif k in settings:
            settings[k] = v
    for k in list(settings):
        if hasattr(args, k):
            settings[k] = getattr(args, k)
    for k in list(opt):
        flag = f"optimizer_{k}"
        if hasattr(args, flag):
            opt[k] = getattr(args, flag)
    settings["optimizer"] = opt
    return settings


def _planner_config(settings):
    if settings["ops"]:
        names = settings["ops"]
        if isinstance(names, str):
            names = [n.strip() for n in names.split(",") if n.strip()]
        op_set = tuple(op_from_name(n) for n in names)
    else:
        op_set = ALL_OPS
    return PlannerConfig(
        max_steps=settings["max_steps"],
        beam_size=settings["beam"],
        epsilon=settings["eps"],
        op_set=op_set,
        order_mode=settings["order"],
        egreedy_prob=settings["egreedy_prob"],
        rng_seed=settings["seed"],
        cost_name=settings["cost"],
        optimizer=OptimizerConfig(**settings["optimizer"]),
    )


def _maybe_downscale(img, downscale):
    if downscale in (None, "off", "0"):
        return img, False
    long_side = int(downscale)
    h, w = img.shape[:2]
    if max(h, w) <= long_side:
        return img, False
    scale = long_side / max(h, w)
    return resize_bilinear(img, max(1, round(w * scale)), max(1, round(h * scale))), True


def _emit(obj):
    sys.stdout.write(json.dumps(obj) + "\n")


def _plan_pair(input_path, target_path, settings):
    cfg = _planner_config(settings)
    full_input = load_image(input_path)
    full_target = load_image(target_path)
    plan_input, downscaled = _maybe_downscale(full_input, settings["downscale"])
    if downscaled:
        plan_target = resize_bilinear(full_target, plan_input.shape[1],
                                      plan_input.shape[0])
    else:
        plan_target = full_target
    cost_fn = make_cost(cfg.cost_name, plan_target)
    a_plan = planner_mod.plan(plan_input, cost_fn, cfg)
    return a_plan, full_input, full_target, downscaled


def cmd_plan(args):
    settings = _resolve(args)
    a_plan, full_input, full_target, downscaled = _plan_pair(
        args.input, args.target, settings
    )
    if args.out:
        save_plan(a_plan, args.out)
    if args.save_intermediates:
        os.makedirs(args.save_intermediates, exist_ok=True)
        image = full_input
        for t, step in enumerate(a_plan.steps):
            image = apply_op(step.op, image, step.params)
            save_image(image, os.path.join(
                args.save_intermediates, f"step_{t:02d}_{step.op.value}.png"
            ))
    line = {
        "final_cost": a_plan.final_cost,
        "initial_cost": a_plan.initial_cost,
        "steps": len(a_plan.steps),
        "terminated_by": a_plan.terminated_by,
    }
    if downscaled:
        replayed = replay(full_input, a_plan)
        line["full_res_final_cost"] = l1_cost(replayed, full_target)
    _emit(line)
    return 0


def cmd_apply(args):
    a_plan = load_plan(args.plan)
    img = load_image(args.input)
    masks = None
    if getattr(a_plan, "mask_paths", None):
        masks = [
            load_mask(p) if p else np.ones(img.shape[:2])
            for p in a_plan.mask_paths
        ]
    out = replay(img, a_plan, masks=masks)
    save_image(out, args.out)
    line = {"out": args.out}
    if args.target:
        line["l1_to_target"] = l1_cost(out, load_image(args.target))
    _emit(line)
    return 0


def _read_manifest(path):
    entries = []
    ids = set()
    with open(path, encoding="utf-8") as f:
        for n, raw in enumerate(f, 1):
            raw = raw.strip()
            if not raw:
                continue
            entry = json.loads(raw)
            for key in ("id", "input", "target"):
                if key not in entry:
                    raise ValueError(f"manifest line {n}: missing {key!r}")
            if entry["id"] in ids:
                raise ValueError(f"manifest line {n}: duplicate id {entry['id']!r}")
            ids.add(entry["id"])
            entries.append(entry)
    for entry in entries:
        for key in ("input", "target"):
            if not os.path.exists(entry[key]):
                raise ValueError(f"entry {entry['id']}: no such file {entry[key]}")
    return entries


def _batch_one(entry, settings, out_dir):
    a_plan, _, _, _ = _plan_pair(entry["input"], entry["target"], settings)
    out_path = os.path.join(out_dir, f"{entry['id']}.json")
    save_plan(a_plan, out_path)
    return {
        "id": entry["id"],
        "final_cost": a_plan.final_cost,
        "steps": len(a_plan.steps),
        "ops": [s.op.value for s in a_plan.steps],
    }


def cmd_batch(args):
    settings = _resolve(args)
    entries = _read_manifest(args.manifest)
    os.makedirs(args.out_dir, exist_ok=True)

    results = []
    failures = 0
    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = {
                pool.submit(_batch_one, e, settings, args.out_dir): e
                for e in entries
            }
            done = {}
            for fut, entry in futures.items():
                try:
                    done[entry["id"]] = fut.result()
                except Exception as exc:
                    logger.error("entry %s failed: %s", entry["id"], exc)
                    failures += 1
            results = [done[e["id"]] for e in entries if e["id"] in done]
    else:
        for entry in entries:
            try:
                results.append(_batch_one(entry, settings, args.out_dir))
            except Exception as exc:
                logger.error("entry %s failed: %s", entry["id"], exc)
                failures += 1

    if entries and not results:
        print("all manifest entries failed", file=sys.stderr)
        return 1

    costs = [r["final_cost"] for r in results]
    histogram = {}
    op_usage = {}
    for r in results:
        histogram[str(r["steps"])] = histogram.get(str(r["steps"]), 0) + 1
        for op in r["ops"]:
            op_usage[op] = op_usage.get(op, 0) + 1
    aggregate = {
        "entries": len(results),
        "failures": failures,
        "mean_final_l1": statistics.fmean(costs) if costs else None,
        "median_final_l1": statistics.median(costs) if costs else None,
        "step_histogram": dict(sorted(histogram.items())),
        "op_usage": dict(sorted(op_usage.items())),
    }
    with open(os.path.join(args.out_dir, "aggregate.json"), "w",
              encoding="utf-8") as f:
        f.write(json.dumps(aggregate) + "\n")
    _emit(aggregate)
    return 0


def _collect_pairs(a, b):
    if os.path.isdir(a) != os.path.isdir(b):
        raise ValueError("--a and --b must both be files or both directories")
    if not os.path.isdir(a):
        return [(os.path.basename(a), a, b)]
    names_a = sorted(
        n for n in os.listdir(a) if n.lower().endswith((".png", ".jpg", ".jpeg"))
    )
    names_b = sorted(
        n for n in os.listdir(b) if n.lower().endswith((".png", ".jpg", ".jpeg"))
    )
    if names_a != names_b:
        raise ValueError("directories do not contain matching image names")
    return [(n, os.path.join(a, n), os.path.join(b, n)) for n in names_a]


def cmd_metrics(args):
    if not args.variance and not (args.a and args.b):
        raise ValueError("metrics needs --a and --b, or --variance")
    if args.variance:
        names = sorted(
            n for n in os.listdir(args.variance)
            if n.lower().endswith((".png", ".jpg", ".jpeg"))
        )
        images = [load_image(os.path.join(args.variance, n)) for n in names]
        sigma = metrics_mod.image_variance(images)
        _emit({"images": len(images), "sigma": sigma, "sigma_x100": 100.0 * sigma})
        return 0
    pairs = _collect_pairs(args.a, args.b)
    l1s = []
    ssims = []
    for pair_id, pa, pb in pairs:
        report = metrics_mod.compare(load_image(pa), load_image(pb))
        l1s.append(report.l1)
        ssims.append(report.ssim)
        _emit({"pair_id": pair_id, "l1": report.l1, "ssim": report.ssim})
    _emit({
        "pair_id": None,
        "aggregate": True,
        "pairs": len(pairs),
        "l1": statistics.fmean(l1s),
        "ssim": statistics.fmean(ssims),
    })
    return 0


def cmd_verify_dpg(args):
    settings = _resolve(args)
    if args.plan:
        a_plan = load_plan(args.plan)
    else:
        a_plan, _, _, _ = _plan_pair(args.input, args.target, settings)
    input_img = load_image(args.input)
    target = load_image(args.target)
    try:
        report = verify_dpg_equivalence(input_img, target, a_plan,
                                        fd_step=args.fd_step)
    except BoundaryParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit({
        "max_rel_discrepancy": report.max_rel_discrepancy,
        "max_abs_discrepancy": report.max_abs_discrepancy,
        "gradient_scale": report.gradient_scale,
        "telescope_error": report.telescope_error,
        "passed": report.passed,
    })
    return 0 if report.passed else 1


def cmd_local_plan(args):
    settings = _resolve(args)
    cfg = _planner_config(settings)
    input_img = load_image(args.input)
    target = load_image(args.target)
    mask_names = sorted(
        n for n in os.listdir(args.masks) if n.lower().endswith(".png")
    )
    if not mask_names:
        print(f"error: no PNG masks found in {args.masks}", file=sys.stderr)
        return 1
    mask_paths = [os.path.join(args.masks, n) for n in mask_names]
    masks = [load_mask(p) for p in mask_paths]
    cost_fn = make_cost(cfg.cost_name, target)
    a_plan = plan_local(input_img, cost_fn, masks, cfg, mask_paths=mask_paths)
    if args.out:
        save_plan(a_plan, args.out)
    _emit({
        "final_cost": a_plan.final_cost,
        "initial_cost": a_plan.initial_cost,
        "steps": len(a_plan.steps),
        "terminated_by": a_plan.terminated_by,
    })
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="editplan",
        description="Plan, replay, and evaluate parametric image edit sequences.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="plan an edit sequence for an image pair")
    p.add_argument("--input", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--out", default=None, help="write plan JSON here")
    p.add_argument("--save-intermediates", default=None)
    _add_planner_flags(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("apply", help="replay a plan file on an image")
    p.add_argument("--input", required=True)
    p.add_argument("--plan", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--target", default=None,
                   help="also report L1 to this image")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("batch", help="plan every entry of a JSONL manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--jobs", type=int, default=1)
    _add_planner_flags(p)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("metrics", help="L1/SSIM between images or directories")
    p.add_argument("--a")
    p.add_argument("--b")
    p.add_argument("--variance", default=None,
                   help="compute variance over the images in this directory")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("verify-dpg",
                       help="check gradient equivalence over a plan numerically")
    p.add_argument("--input", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--plan", default=None)
    p.add_argument("--fd-step", type=float, default=1e-4)
    _add_planner_flags(p)
    p.set_defaults(func=cmd_verify_dpg)

    p = sub.add_parser("local-plan", help="mask-restricted planning")
    p.add_argument("--input", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--masks", required=True, help="directory of mask PNGs")
    p.add_argument("--out", default=None)
    _add_planner_flags(p)
    p.set_defaults(func=cmd_local_plan)

    return parser


def main(argv=None):
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ImageError, PlanFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
