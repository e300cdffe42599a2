"""The quality metrics: L1, SSIM, and image-set variance.

Shows how the metrics behave on identical, mildly edited, and unrelated
image pairs, and how set variance quantifies the spread of alternative
renditions of the same scene. Run:

    python3 demos/demo_metrics.py
"""

import numpy as np

import editplan as ep


def synthetic_photo(size=64, seed=11):
    rng = np.random.default_rng(seed)
    base = rng.random((4, 4, 3))
    img = ep.resize_bilinear(base, size, size)
    return np.clip(0.15 + 0.7 * img, 0.0, 1.0)


def main():
    img = synthetic_photo()
    mild = ep.apply_brightness(img, 0.1)
    strong = ep.apply_contrast(ep.apply_brightness(img, 0.4), 0.8)
    unrelated = synthetic_photo(seed=99)

    print("pair comparisons (L1 lower is closer, SSIM higher is closer):")
    for name, other in [("identical", img), ("mild edit", mild),
                        ("strong edit", strong), ("unrelated", unrelated)]:
        r = ep.compare(img, other)
        print(f"  {name:<12} L1={r.l1:.5f}  SSIM={r.ssim:.4f}")

    # Set variance: how much do alternative edits of one scene disagree?
    mild_set = [ep.apply_brightness(img, p) for p in (-0.05, 0.0, 0.05)]
    wild_set = [ep.apply_brightness(img, p) for p in (-0.4, 0.0, 0.4)]
    print("\nimage-set variance (spread of renditions):")
    print(f"  three near-identical edits: {ep.image_variance(mild_set):.6f}")
    print(f"  three very different edits: {ep.image_variance(wild_set):.6f}")
    print(f"  identical copies:           "
          f"{ep.image_variance([img, img, img, img]):.6f}")


if __name__ == "__main__":
    main()
