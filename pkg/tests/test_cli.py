import json
import subprocess
import sys
import threading
import time
from pathlib import Path

import pytest

from sls.cli import main

REPO = Path(__file__).resolve().parents[1]
SCENARIOS = REPO / "scenarios"


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestScenarioCommand:
    def test_static_center_passes(self, capsys):
        code, out, _ = run_cli(["scenario", "--scenario",
                                str(SCENARIOS / "static_center.scn")], capsys)
        assert code == 0
        assert "outcome=aimed" in out

    def test_all_occluded_passes(self, capsys):
        code, out, _ = run_cli(["scenario", "--scenario",
                                str(SCENARIOS / "all_occluded.scn")], capsys)
        assert code == 0
        assert "outcome=no_marker" in out

    def test_impossible_assertion_exit_4(self, tmp_path, capsys):
        scn = tmp_path / "impossible.scn"
        scn.write_text("aim_noise 2.0\n0.0 place_marker 320 240 10\n"
                       "1.0 trigger\nexpect beam_error_max 0\n")
        code, _, _ = run_cli(["scenario", "--scenario", str(scn)], capsys)
        assert code == 4

    def test_parse_error_exit_2(self, tmp_path, capsys):
        scn = tmp_path / "bad.scn"
        scn.write_text("0.0 explode\n")
        code, _, err = run_cli(["scenario", "--scenario", str(scn)], capsys)
        assert code == 2

    def test_missing_file_exit_2(self, capsys):
        code, _, err = run_cli(["scenario", "--scenario", "/nonexistent.scn"], capsys)
        assert code == 2
        assert "/nonexistent.scn" in err

    def test_json_output_parses(self, capsys):
        code, out, _ = run_cli(["scenario", "--json", "--scenario",
                                str(SCENARIOS / "static_center.scn")], capsys)
        assert code == 0
        report = json.loads(out)
        assert report["passed"] is True


class TestDatasetAndEval:
    def test_generate_then_eval(self, tmp_path, capsys):
        code, out, _ = run_cli(["dataset", "--out", str(tmp_path / "ds"),
                                "--counts", "2,2,4", "--seed", "5", "--json"], capsys)
        assert code == 0
        assert json.loads(out)["total"] == 8

        code, out, _ = run_cli(["eval", "--dataset", str(tmp_path / "ds"),
                                "--split", "validation", "--json"], capsys)
        assert code == 0
        metrics = json.loads(out)
        assert metrics["recall"] >= 0.99
        assert metrics["false_positives"] == 0

    def test_bad_counts_exit_2(self, tmp_path, capsys):
        code, _, _ = run_cli(["dataset", "--out", str(tmp_path), "--counts", "0,1,1"],
                             capsys)
        assert code == 2

    def test_eval_missing_dataset_exit_5(self, tmp_path, capsys):
        code, _, _ = run_cli(["eval", "--dataset", str(tmp_path / "empty")], capsys)
        assert code == 5

    def test_eval_deterministic(self, tmp_path, capsys):
        run_cli(["dataset", "--out", str(tmp_path / "ds"), "--counts", "1,1,3",
                 "--seed", "9"], capsys)
        outputs = []
        for _ in range(2):
            _, out, _ = run_cli(["eval", "--dataset", str(tmp_path / "ds"),
                                 "--json"], capsys)
            outputs.append(out)
        assert outputs[0] == outputs[1]


class TestCalibrateCheck:
    def test_valid_file(self, capsys):
        code, out, _ = run_cli(["calibrate-check", "--calibration",
                                str(REPO / "config" / "calibration.ini"), "--json"],
                               capsys)
        assert code == 0
        assert json.loads(out)["valid"] is True

    def test_missing_file_exit_2_names_path(self, capsys):
        code, _, err = run_cli(["calibrate-check", "--calibration",
                                "/no/such/file.ini"], capsys)
        assert code == 2
        assert "/no/such/file.ini" in err

    def test_invalid_profile_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.ini"
        bad.write_text((REPO / "config" / "calibration.ini").read_text()
                       .replace("theta_x_max = 30", "theta_x_max = 0"))
        code, _, err = run_cli(["calibrate-check", "--calibration", str(bad)], capsys)
        assert code == 2
        assert "theta_x_max" in err


class TestRunCommand:
    def test_missing_calibration_exit_2(self, capsys):
        code, _, err = run_cli(["run", "--calibration", "/no/file.ini"], capsys)
        assert code == 2
        assert "/no/file.ini" in err

    def test_full_cycle_over_mqtt(self):
        proc = subprocess.Popen(
            [sys.executable, "-m", "sls.cli", "run",
             "--init-seconds", "0.2", "--capture-window", "0.6",
             "--detect-budget", "0.1", "--marker", "480,120,9"],
            stdout=subprocess.PIPE, text=True)
        records = []
        broker = {}
        ready = threading.Event()

        def reader():
            for line in proc.stdout:
                rec = json.loads(line)
                records.append(rec)
                if rec.get("record") == "startup":
                    broker["addr"] = rec["broker"]
                if rec.get("phase") == "ready":
                    ready.set()
                if rec.get("record") == "cycle":
                    ready.set()

        thread = threading.Thread(target=reader, daemon=True)
        thread.start()
        try:
            deadline = time.time() + 10
            while "addr" not in broker and time.time() < deadline:
                time.sleep(0.05)
            assert "addr" in broker
            assert ready.wait(5.0)

            from sls.mqtt import TriggerClient
            host, port = broker["addr"].rsplit(":", 1)
            trig = TriggerClient(host, int(port))
            trig.press()
            deadline = time.time() + 10
            while time.time() < deadline:
                if any(r.get("record") == "cycle" for r in records):
                    break
                time.sleep(0.1)
            trig.close()
        finally:
            proc.send_signal(2)
            proc.wait(timeout=10)
            thread.join(timeout=2)

        phases = [r["phase"] for r in records if r.get("record") == "phase"]
        assert phases[:2] == ["initializing", "ready"]
        assert "aimed" in phases
        cycles = [r for r in records if r.get("record") == "cycle"]
        assert len(cycles) == 1
        assert cycles[0]["outcome"] == "aimed"
        assert any(r.get("record") == "shutdown" for r in records)
