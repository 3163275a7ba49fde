"""Smoke test for the stsm_py extension module.

Builds the cdylib with cargo (unless --no-build), copies it next to this
script as stsm_py.so and exercises the bindings.
"""

import argparse
import math
import pathlib
import shutil
import subprocess
import sys

HERE = pathlib.Path(__file__).resolve().parent
ROOT = HERE.parent


def build(release):
    cmd = ["cargo", "build", "-p", "stsm-python"]
    if release:
        cmd.append("--release")
    subprocess.run(cmd, cwd=ROOT, check=True)
    profile = "release" if release else "debug"
    lib = ROOT / "target" / profile / "libstsm_py.so"
    shutil.copyfile(lib, HERE / "stsm_py.so")


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--no-build", action="store_true")
    parser.add_argument("--release", action="store_true")
    args = parser.parse_args()
    if not args.no_build:
        build(args.release)
    sys.path.insert(0, str(HERE))
    import stsm_py as s

    z = s.BlochDirection(0.0, 0.0)
    x = s.BlochDirection(math.pi / 2, 0.0)
    close(s.transition_probability(z, x, "+"), 0.5, 1e-12)
    close(s.bell_joint_probability(z, z, "+", "+"), 0.5, 1e-12)

    dist = s.ensemble(x)
    assert dist.labels == ["(z+)(x+)", "(z+)(x-)"], dist.labels
    drawn = dist.sample(1000, seed=5)
    assert sum(drawn["counts"]) == 1000
    assert drawn == dist.sample(1000, seed=5, parallel=True)

    bell = s.ensemble(z, second=x)
    close(bell.marginal(0)[0], 0.5, 1e-12)
    assert len(bell) == 4

    sol = s.solve_lambda(0.5)
    close(1 / math.tanh(sol["lambda"]) - 1 / sol["lambda"], -0.5, 1e-10)
    report = s.estimate(0.5)
    close(report["rho"][0][0], 0.75, 1e-8)
    close(report["rho"][3][0], 0.25, 1e-8)

    close(s.detector_distribution("double-bs")[0], 1.0, 1e-12)
    run = s.run_experiment("double-bs", 1000, seed=1)
    assert run["detector_counts"] == {"D1": 1000, "D2": 0}
    dc = s.delayed_choice_report(2000, seed=3)
    assert [p["placement"] for p in dc["by_placement"]] == ["after-first-bs", "after-second-bs"]

    for bad in (lambda: s.estimate(1.5), lambda: s.BlochDirection(4.0, 0.0),
                lambda: s.run_experiment("delayed-choice", 10)):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")

    print("stsm_py smoke test passed")


if __name__ == "__main__":
    main()
