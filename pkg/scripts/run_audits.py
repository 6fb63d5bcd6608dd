#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Audit Launcher
Dependency check, host info, test runs and the reproduction suites
"""

import argparse
import os
import platform
import subprocess
import sys
from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parents[1]
SRC_DIR = PROJECT_ROOT / "src"

REPRODUCE_TARGETS = ("iid", "lower", "upper", "concentration")
IID_DEMO_DIST = '{"kind":"discrete","support":[{"value":2,"prob":0.5},{"value":1,"prob":0.5}]}'


def _env() -> dict:
    env = os.environ.copy()
    src_path = str(SRC_DIR.resolve())
    existing_pythonpath = env.get("PYTHONPATH", "")
    env["PYTHONPATH"] = f"{src_path}{os.pathsep}{existing_pythonpath}" if existing_pythonpath else src_path
    return env


def check_dependencies() -> bool:
    """Check that the numerical stack imports"""
    print("🔍 Checking dependencies...")

    missing_deps = []
    for module, package in (("numpy", "numpy"), ("scipy", "scipy"), ("psutil", "psutil"), ("pytest", "pytest")):
        try:
            __import__(module)
            print(f"✅ {package}")
        except ImportError:
            missing_deps.append(package)

    if missing_deps:
        print(f"❌ Missing dependencies: {', '.join(missing_deps)}")
        print("Install with: pip install -r requirements.txt")
        return False

    print("✅ All dependencies available")
    return True


def show_system_info():
    """Host details relevant to sweep sizing"""
    print("ℹ️ System Information")
    print("=" * 30)
    print(f"Python: {sys.version.split()[0]}")
    print(f"OS: {platform.system()} {platform.release()}")

    try:
        import psutil
        memory = psutil.virtual_memory()
        print(f"RAM: {memory.total // 1024 // 1024} MB")
        print(f"Available: {memory.available // 1024 // 1024} MB")
        print(f"Physical cores: {psutil.cpu_count(logical=False)} (sweep --workers 0)")
    except ImportError:
        print("Memory info unavailable (psutil required)")

    sys.path.insert(0, str(SRC_DIR))
    try:
        import logging

        from distribution_auctions.config import Config
        logging.basicConfig(level=logging.INFO, format="%(message)s")
        Config().print_current_settings()
    except ImportError as e:
        print(f"⚠️ Package import error: {e}")


def run_tests(slow: bool) -> int:
    """Run the pytest suite (acceptance checks only with --slow)"""
    print("🧪 Running tests...")
    cmd = [sys.executable, "-m", "pytest", str(PROJECT_ROOT / "tests")]
    cmd += ["-m", "slow"] if slow else ["-m", "not slow"]
    return subprocess.run(cmd, env=_env(), cwd=str(PROJECT_ROOT)).returncode


def run_reproduction(targets, seed: int, output_dir: Path) -> int:
    """Run each reproduce target, one JSON report per target"""
    output_dir.mkdir(parents=True, exist_ok=True)
    worst = 0
    for target in targets:
        report = output_dir / f"reproduce_{target}.json"
        cmd = [sys.executable, "-m", "distribution_auctions", "reproduce", target,
               "--seed", str(seed), "--output-path", str(report), "--log-level", "INFO"]
        if target == "iid":
            cmd += ["--dist", IID_DEMO_DIST]
        print(f"\n🚀 reproduce {target} -> {report}")
        code = subprocess.run(cmd, env=_env(), cwd=str(PROJECT_ROOT)).returncode
        print(("✅" if code == 0 else "❌") + f" reproduce {target}: exit {code}")
        worst = max(worst, code)
    return worst


def main():
    parser = argparse.ArgumentParser(
        description="Distribution-reporting auction audits",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python scripts/run_audits.py --check          # Dependency check
  python scripts/run_audits.py --info           # Host and config info
  python scripts/run_audits.py --test           # Fast test suite
  python scripts/run_audits.py --test --slow    # Acceptance suite
  python scripts/run_audits.py                  # Every reproduce target
  python scripts/run_audits.py --target upper --seed 3
        """
    )
    parser.add_argument("--check", "-c", action="store_true", help="Check dependencies")
    parser.add_argument("--info", "-i", action="store_true", help="Show host information")
    parser.add_argument("--test", "-t", action="store_true", help="Run the test suite")
    parser.add_argument("--slow", action="store_true", help="With --test: run the acceptance suite")
    parser.add_argument("--target", choices=REPRODUCE_TARGETS, action="append",
                        help="Reproduce target (repeatable; default all)")
    parser.add_argument("--seed", type=int, default=0, help="Root seed")
    parser.add_argument("--output-dir", default=str(PROJECT_ROOT / "reports"), help="Report directory")
    args = parser.parse_args()

    print("""
📊 Distribution Auction Audits
==============================
    """)

    if args.info:
        show_system_info()
        return

    if not check_dependencies():
        sys.exit(1)
    if args.check:
        return

    if args.test:
        sys.exit(run_tests(args.slow))

    sys.exit(run_reproduction(args.target or REPRODUCE_TARGETS, args.seed, Path(args.output_dir)))


if __name__ == "__main__":
    main()
