#!/usr/bin/env python3
"""Closed-loop aiming error study on the simulated rig.

Runs full trigger cycles (capture -> detect -> aim) for random marker poses
and reports the final beam-to-marker error, grouped by image noise level.
Uses the color-blob detector on rendered frames, so the numbers include
rendering, centroiding, angle mapping, and servo settling error.

Example:
    python3 scripts/closed_loop_error_study.py --positions 50 \
        --noise 0,2,4,8 --seed 3
"""

import argparse
import math
import sys

import numpy as np

from sls.controller import ControllerState, Phase, TimingConfig
from sls.detection import BlobParams, reference_blob_detect
from sls.geometry import default_profile
from sls.runtime import LightsRecorder, run_cycle
from sls.sim.beam import beam_aim_point
from sls.sim.camera import Scene, SimCamera
from sls.sim.clock import VirtualClock
from sls.sim.servo import ServoModel

CFG = TimingConfig(init_duration=0.1, capture_window=5.0, detect_budget=3.0)


def run_once(cal, cx, cy, radius, noise_sigma, seed) -> float | None:
    """One trigger cycle; returns the beam error in px, or None on a miss."""
    scene = Scene()
    scene.place_marker(cx, cy, radius)
    scene.noise_sigma = noise_sigma
    camera = SimCamera(scene, cal.crop, seed=seed)
    params = BlobParams()
    servo = ServoModel(current_x=cal.theta_x_ref, current_y=cal.theta_y_ref,
                       target_x=cal.theta_x_ref, target_y=cal.theta_y_ref)
    state = ControllerState(phase=Phase.READY)
    state, servo, report = run_cycle(
        state, VirtualClock(), camera, lambda f: reference_blob_detect(f, params),
        cal, servo, LightsRecorder(), CFG)
    if report.outcome != "aimed":
        return None
    beam = beam_aim_point(servo, cal)
    return math.hypot(beam[0] - cx, beam[1] - cy)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--positions", type=int, default=50)
    parser.add_argument("--noise", default="0,2,4,8",
                        help="comma-separated pixel-noise sigmas to sweep")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    cal = default_profile()
    header = (f"{'noise':>6} {'cycles':>7} {'aimed':>6} {'mean err':>9} "
              f"{'p95 err':>8} {'max err':>8}")
    print(header)
    print("-" * len(header))
    for sigma in (float(v) for v in args.noise.split(",")):
        rng = np.random.default_rng(args.seed)
        errors = []
        misses = 0
        for index in range(args.positions):
            radius = float(rng.uniform(8.0, 20.0))
            cx = float(rng.uniform(radius + 4.0, cal.crop.width - radius - 4.0))
            cy = float(rng.uniform(radius + 4.0, cal.crop.height - radius - 4.0))
            error = run_once(cal, cx, cy, radius, sigma, seed=index)
            if error is None:
                misses += 1
            else:
                errors.append(error)
        aimed = len(errors)
        if errors:
            arr = np.asarray(errors)
            print(f"{sigma:>6.1f} {args.positions:>7} {aimed:>6} "
                  f"{arr.mean():>9.3f} {np.percentile(arr, 95):>8.3f} "
                  f"{arr.max():>8.3f}")
        else:
            print(f"{sigma:>6.1f} {args.positions:>7} {aimed:>6} "
                  f"{'-':>9} {'-':>8} {'-':>8}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
