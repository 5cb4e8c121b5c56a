#!/usr/bin/env python3
"""
Quick spectral smoke run - classifies the example families and runs the shipped presets
"""

import subprocess
import json
import os
import sys
from pathlib import Path
import time
import yaml

OUT_DIR = "Results/quick"

# One classification per row of the case table
QUICK_CLASSIFY_CONFIGS = [
    {"name": "example4-c0", "family": {"name": "example4", "kappa": 0.5, "c": 0.0}, "expect": "Case I"},
    {"name": "example4-c1", "family": {"name": "example4", "kappa": 0.5, "c": 1.0}, "expect": "Case III"},
    {"name": "constant-q-edge", "family": {"name": "constant-q", "q0": 0.0, "omega": "pi"}, "expect": "Case IIb"},
    {"name": "constant-q-minus-identity", "family": {"name": "constant-q", "q0": -1.0, "omega": "pi"}, "expect": "Case IIa"},
]

PRESETS = ["configs/turan_free.yml", "configs/trace_vs_c.yml"]


def create_config(test_cfg):
    config = {"command": "classify", "family": test_cfg["family"],
              "output": {"dir": OUT_DIR, "run_id": test_cfg["name"]}}
    path = Path(OUT_DIR) / "configs" / f"{test_cfg['name']}.yml"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as f:
        yaml.safe_dump(config, f, default_flow_style=False, sort_keys=False)
    return path


def run_runner(config_path, name):
    start = time.time()
    try:
        result = subprocess.run(
            [sys.executable, "spectra_runner.py", "--config", str(config_path), "--out", OUT_DIR],
            capture_output=True,
            text=True,
            timeout=600
        )
    except subprocess.TimeoutExpired:
        return {"name": name, "success": False, "error": "Timeout"}
    return {"name": name, "success": result.returncode == 0, "exit_code": result.returncode,
            "time": time.time() - start, "stderr": result.stderr[-2000:]}


def read_verdict(run_id):
    csv_path = Path(OUT_DIR) / run_id / "classify.csv"
    if not csv_path.exists():
        return None
    rows = [line for line in csv_path.read_text().splitlines() if not line.startswith("#")]
    return rows[1].split(",", 5)[-1] if len(rows) > 1 else None


def main():
    print("⚡ QUICK SPECTRAL RUN")
    print("=" * 70)

    results = []
    for i, cfg in enumerate(QUICK_CLASSIFY_CONFIGS, 1):
        print(f"\n📊 Classify {i}/{len(QUICK_CLASSIFY_CONFIGS)}: {cfg['name']}")
        result = run_runner(create_config(cfg), cfg["name"])
        result["verdict"] = read_verdict(cfg["name"])
        result["expected"] = cfg["expect"]
        result["matches"] = bool(result["verdict"]) and result["verdict"].split(":")[0].split(" (")[0] == cfg["expect"]
        results.append(result)
        status = "✅" if result["matches"] else "❌"
        print(f"{status} {result.get('verdict') or result.get('error') or result.get('stderr')}")

    for preset in PRESETS:
        print(f"\n📊 Preset {preset}")
        result = run_runner(preset, Path(preset).stem)
        results.append(result)
        if result["success"]:
            print(f"✅ Done in {result['time']:.1f}s")
        else:
            print(f"❌ Failed: {result.get('error') or result.get('exit_code')}")

    print("\n\n" + "=" * 70)
    passed = sum(1 for r in results if r.get("matches", r["success"]))
    print(f"📊 {passed}/{len(results)} runs as expected")

    os.makedirs(OUT_DIR, exist_ok=True)
    with open(os.path.join(OUT_DIR, "quick_test_results.json"), 'w') as f:
        json.dump(results, f, indent=2)
    print(f"\n📁 Results saved to: {OUT_DIR}/quick_test_results.json")
    return 0 if passed == len(results) else 1


if __name__ == "__main__":
    sys.exit(main())
