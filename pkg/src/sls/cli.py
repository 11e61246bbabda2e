"""Operator command-line interface.

Subcommands: run, scenario, dataset, eval, calibrate-check, serve-console.
Configuration precedence: flags > environment variables > built-in defaults.
Environment variables: SLS_CALIBRATION, SLS_BROKER, SLS_TOPIC, SLS_SEED.

Exit codes (stable):
    0  success
    2  invalid configuration (bad paths, counts, parse errors)
    3  endpoint bind/connect failure
    4  scenario assertion failure
    5  missing dataset
"""

from __future__ import annotations

import argparse
import json
import os
import signal
import sys

from . import geometry
from .dataset import (DEFAULT_COUNTS, MissingDataset, evaluate_detector,
                      generate_dataset, load_manifest)
from .detection import DetectorSpec
from .mqtt import DEFAULT_TRIGGER_TOPIC

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BIND = 3
EXIT_ASSERTION = 4
EXIT_MISSING_DATASET = 5


def _env(name: str, default=None):
    return os.environ.get(name, default)


def _parse_endpoint(value: str) -> tuple[str, int]:
    host, _, port = value.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"endpoint must be HOST:PORT, got {value!r}")
    return host, int(port)


def _load_profile(path: str | None):
    """Calibration from an explicit path, the env, or built-in defaults."""
    path = path or _env("SLS_CALIBRATION")
    if path is None:
        return geometry.default_profile(), "<built-in defaults>"
    if not os.path.isfile(path):
        raise FileNotFoundError(path)
    return geometry.load_calibration_file(path), path


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--calibration", metavar="PATH",
                        help="calibration profile file (default: built-in profile)")
    parser.add_argument("--json", action="store_true",
                        help="machine-readable JSON output")
    parser.add_argument("--seed", type=int,
                        default=int(_env("SLS_SEED", "0")), metavar="N")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sls",
                                     description="Vision-guided pan/tilt lighting "
                                                 "controller and simulation rig")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the controller with simulated adapters")
    _add_common(p_run)
    p_run.add_argument("--broker", metavar="HOST:PORT",
                       default=_env("SLS_BROKER", "127.0.0.1:0"),
                       help="embedded broker bind endpoint (port 0 = ephemeral)")
    p_run.add_argument("--topic", default=_env("SLS_TOPIC", DEFAULT_TRIGGER_TOPIC))
    p_run.add_argument("--init-seconds", type=float, default=2.0)
    p_run.add_argument("--capture-window", type=float, default=5.0)
    p_run.add_argument("--detect-budget", type=float, default=3.0)
    p_run.add_argument("--detector", choices=("blob", "perfect"), default="blob")
    p_run.add_argument("--marker", metavar="X,Y,R",
                       help="pre-place a simulated marker, e.g. 320,240,10")

    p_scn = sub.add_parser("scenario", help="run a scenario file on the simulated rig")
    _add_common(p_scn)
    p_scn.add_argument("--scenario", metavar="PATH", required=True)
    p_scn.add_argument("--report", metavar="PATH", help="write the report JSON here")

    p_ds = sub.add_parser("dataset", help="generate the synthetic marker dataset")
    _add_common(p_ds)
    p_ds.add_argument("--out", metavar="DIR", required=True)
    p_ds.add_argument("--counts", metavar="TRAIN,TEST,VAL",
                      default=None, help="split sizes (default 132,50,30)")

    p_ev = sub.add_parser("eval", help="evaluate the detector on a generated dataset")
    _add_common(p_ev)
    p_ev.add_argument("--dataset", metavar="DIR", required=True)
    p_ev.add_argument("--split", default="validation",
                      choices=("train", "test", "validation"))

    p_cal = sub.add_parser("calibrate-check", help="validate a calibration file")
    _add_common(p_cal)

    p_con = sub.add_parser("serve-console", help="run the controller plus the "
                                                 "console websocket backend")
    _add_common(p_con)
    p_con.add_argument("--broker", metavar="HOST:PORT",
                       default=_env("SLS_BROKER", "127.0.0.1:0"))
    p_con.add_argument("--topic", default=_env("SLS_TOPIC", DEFAULT_TRIGGER_TOPIC))
    p_con.add_argument("--port", type=int, default=8765,
                       help="websocket port (0 = ephemeral)")
    p_con.add_argument("--host", default="127.0.0.1")
    p_con.add_argument("--init-seconds", type=float, default=0.5)
    p_con.add_argument("--capture-window", type=float, default=1.5)
    p_con.add_argument("--detect-budget", type=float, default=0.5)
    p_con.add_argument("--detector", choices=("blob", "perfect"), default="blob")

    return parser


def cmd_run(args) -> int:
    from .controller import TimingConfig
    from .live import LiveController

    try:
        cal, cal_source = _load_profile(args.calibration)
        host, port = _parse_endpoint(args.broker)
        cfg = TimingConfig(args.init_seconds, args.capture_window, args.detect_budget)
    except FileNotFoundError as exc:
        print(f"error: calibration file not found: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, geometry.ParseError, geometry.InvalidProfile) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    def emit(record: dict):
        print(json.dumps(record, sort_keys=True), flush=True)

    try:
        controller = LiveController(cal, cfg, broker_host=host, broker_port=port,
                                    topic=args.topic, detector=args.detector,
                                    seed=args.seed)
    except OSError as exc:
        print(f"error: cannot bind broker endpoint {args.broker}: {exc}", file=sys.stderr)
        return EXIT_BIND

    if args.marker:
        try:
            mx, my, mr = (float(v) for v in args.marker.split(","))
        except ValueError:
            print("error: --marker must be X,Y,R", file=sys.stderr)
            controller.stop()
            return EXIT_CONFIG
        controller.scene.place_marker(mx, my, mr)

    controller.listeners.on_phase.append(
        lambda t, phase, lights: emit({"record": "phase", "t": round(t, 3),
                                       "phase": phase.value}))
    controller.listeners.on_cycle.append(
        lambda report: emit({"record": "cycle", **report}))

    stop = {"flag": False}
    signal.signal(signal.SIGINT, lambda *a: stop.update(flag=True))
    signal.signal(signal.SIGTERM, lambda *a: stop.update(flag=True))

    controller.start()
    emit({"record": "startup", "calibration": cal_source,
          "broker": f"{controller.broker_addr[0]}:{controller.broker_addr[1]}",
          "topic": args.topic})
    try:
        import time
        while not stop["flag"]:
            time.sleep(0.1)
    finally:
        final_phase = controller.state.phase.value
        controller.stop()
        emit({"record": "shutdown", "final_phase": final_phase})
    return EXIT_OK


def cmd_scenario(args) -> int:
    from .sim.scenario import ScenarioError, load_scenario, run_scenario

    try:
        cal, _ = _load_profile(args.calibration)
        if not os.path.isfile(args.scenario):
            print(f"error: scenario file not found: {args.scenario}", file=sys.stderr)
            return EXIT_CONFIG
        script = load_scenario(args.scenario)
    except (ScenarioError, geometry.ParseError, geometry.InvalidProfile,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    report = run_scenario(script, cal)
    output = report.to_json()
    if args.report:
        with open(args.report, "w", encoding="utf-8") as handle:
            handle.write(output + "\n")
    if args.json:
        print(output)
    else:
        for i, cycle in enumerate(report.cycles):
            print(f"cycle {i}: outcome={cycle.outcome} detections={cycle.detections}"
                  f" angles={cycle.angles}")
        print(f"final beam error: {report.final_beam_error_px} px")
        for failure in report.assertion_failures:
            print(f"ASSERTION FAILED: {failure}")
    return EXIT_OK if report.passed else EXIT_ASSERTION


def cmd_dataset(args) -> int:
    counts = None
    if args.counts:
        try:
            train, test, val = (int(v) for v in args.counts.split(","))
            counts = {"train": train, "test": test, "validation": val}
            if min(counts.values()) <= 0:
                raise ValueError
        except ValueError:
            print("error: --counts must be three positive integers TRAIN,TEST,VAL",
                  file=sys.stderr)
            return EXIT_CONFIG
    manifest = generate_dataset(args.out, seed=args.seed, counts=counts)
    summary = {"total": manifest.total,
               **{split: manifest.count(split) for split in DEFAULT_COUNTS}}
    if args.json:
        print(json.dumps(summary, sort_keys=True))
    else:
        print(f"wrote {manifest.total} images to {args.out} "
              f"({summary['train']}/{summary['test']}/{summary['validation']} "
              f"train/test/validation)")
    return EXIT_OK


def cmd_eval(args) -> int:
    try:
        manifest = load_manifest(args.dataset)
        metrics = evaluate_detector(DetectorSpec(), manifest, args.split)
    except MissingDataset as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_DATASET
    if args.json:
        print(json.dumps(metrics.as_dict(), sort_keys=True))
    else:
        print(f"{args.split}: recall={metrics.recall:.4f} "
              f"mean_centroid_error={metrics.mean_centroid_error:.4f}px "
              f"false_positives={metrics.false_positives}")
    return EXIT_OK


def cmd_calibrate_check(args) -> int:
    if not args.calibration:
        print("error: calibrate-check requires --calibration PATH", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cal, source = _load_profile(args.calibration)
    except FileNotFoundError as exc:
        print(f"error: calibration file not found: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (geometry.ParseError, geometry.InvalidProfile) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    summary = {
        "source": source,
        "crop": {"start_x": cal.crop.start_x, "start_y": cal.crop.start_y,
                 "width": cal.crop.width, "height": cal.crop.height},
        "theta_ref": [cal.theta_x_ref, cal.theta_y_ref],
        "theta_max": [cal.theta_x_max, cal.theta_y_max],
        "servo_range": [cal.servo_min, cal.servo_max],
        "valid": True,
    }
    print(json.dumps(summary, sort_keys=True) if args.json
          else f"calibration OK: {source}")
    return EXIT_OK


def cmd_serve_console(args) -> int:
    from .console import ConsoleServer
    from .controller import TimingConfig
    from .live import LiveController

    try:
        cal, _ = _load_profile(args.calibration)
        host, port = _parse_endpoint(args.broker)
        cfg = TimingConfig(args.init_seconds, args.capture_window, args.detect_budget)
    except FileNotFoundError as exc:
        print(f"error: calibration file not found: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, geometry.ParseError, geometry.InvalidProfile) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        controller = LiveController(cal, cfg, broker_host=host, broker_port=port,
                                    topic=args.topic, detector=args.detector,
                                    seed=args.seed).start()
    except OSError as exc:
        print(f"error: cannot bind broker endpoint {args.broker}: {exc}", file=sys.stderr)
        return EXIT_BIND
    controller.ready.wait(max(10.0, args.init_seconds + 5.0))

    server = ConsoleServer(controller, host=args.host, port=args.port)
    signal.signal(signal.SIGINT, lambda *a: server.stop())
    signal.signal(signal.SIGTERM, lambda *a: server.stop())
    try:
        server.run_forever()
    except OSError as exc:
        print(f"error: cannot bind console endpoint: {exc}", file=sys.stderr)
        return EXIT_BIND
    finally:
        controller.stop()
    return EXIT_OK


_COMMANDS = {
    "run": cmd_run,
    "scenario": cmd_scenario,
    "dataset": cmd_dataset,
    "eval": cmd_eval,
    "calibrate-check": cmd_calibrate_check,
    "serve-console": cmd_serve_console,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
