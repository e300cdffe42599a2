"""editplan: reverse-engineer image edits as interpretable operation plans."""

from .cost import (
    CostFn,
    TargetL1Cost,
    TargetL2Cost,
    l1_cost,
    l2_cost,
    make_cost,
    register_cost,
    reward,
)
from .image import (
    ImageError,
    hsv_to_rgb,
    load_image,
    load_mask,
    luminance,
    resize_bilinear,
    rgb_to_hsv,
    save_image,
    validate_image,
    validate_mask,
)
from .metrics import MetricReport, compare, image_variance, ssim
from .optimize import OptimizerConfig, nelder_mead
from .ops import (
    ALL_OPS,
    OpKind,
    ParamBoundsError,
    ParamSpace,
    apply,
    apply_brightness,
    apply_color,
    apply_contrast,
    apply_masked,
    apply_saturation,
    apply_sharpness,
    apply_tone,
    default_space,
    identity_params,
    op_from_name,
)
from .planner import (
    BoundaryParameterError,
    DpgReport,
    LocalPlan,
    Plan,
    PlanFormatError,
    PlannerConfig,
    PlanStep,
    load_plan,
    plan,
    plan_egreedy,
    plan_fixed_order,
    plan_from_dict,
    plan_local,
    plan_to_dict,
    plan_to_json,
    replay,
    save_plan,
    verify_dpg_equivalence,
)

__version__ = "0.1.0"
