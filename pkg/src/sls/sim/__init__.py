"""Hardware-in-the-loop simulation: virtual clock, camera, servos, beam."""

from .clock import VirtualClock, WallClock  # noqa: F401
from .servo import ServoModel, servo_step, angle_to_pulse, OutOfRange  # noqa: F401
from .camera import Scene, SimCamera, PerfectDetector, DropoutDetector  # noqa: F401
from .beam import beam_aim_point  # noqa: F401
from .montecarlo import miss_probability_mc, sample_frame_detected, all_miss_probability  # noqa: F401
