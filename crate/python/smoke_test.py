#!/usr/bin/env python3
"""Smoke test for the sirmc_py extension module.

Builds nothing itself: run `cargo build -p sirmc-py` (or --release) first.
The script locates the compiled cdylib under target/, stages it under the
importable name sirmc_py.so, and exercises every exported operation.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        REPO / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libsirmc_py.so", "sirmc_py.so", "libsirmc_py.dylib")
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("extension not found; run `cargo build -p sirmc-py` first")
    stage = Path(tempfile.mkdtemp(prefix="sirmc_py_"))
    shutil.copy2(built, stage / "sirmc_py.so")
    sys.path.insert(0, str(stage))
    import sirmc_py

    return sirmc_py


def approx(x, y, rel=0.15):
    return abs(x - y) <= rel * abs(y)


def main():
    m = load_module()

    # simulation is deterministic under a fixed seed and conserves the
    # population
    path = m.simulate(a=0.1, c=0.07, n=100_000, i0=100, horizon=200, seed=42)
    again = m.simulate(a=0.1, c=0.07, n=100_000, i0=100, horizon=200, seed=42)
    assert path.states() == again.states()
    assert path.horizon() == 200
    assert all(n1 + n2 + n3 == 100_000 for (_, n1, n2, n3) in path.states())

    # CSV round trip through the same schema the CLI uses
    restored = m.CountPath.from_csv(path.to_csv())
    assert restored.states() == path.states()
    assert restored.transitions() == path.transitions()

    # all five estimators run; the exact and Poisson recovery estimates agree
    fits = m.fit_all(path)
    assert [f["method"] for f in fits] == list(m.METHODS)
    by_method = {f["method"]: f for f in fits}
    assert by_method["binomial-ml"]["c_hat"] == by_method["poisson-aml"]["c_hat"]
    one = m.fit(path, method="poisson-aml")
    assert approx(one["a_hat"], 0.1) and approx(one["c_hat"], 0.07)
    assert approx(one["r0_hat"], 0.1 / 0.07)

    # reproduction-ratio series starts near a/c and the effective ratio
    # never exceeds the basic one
    series = m.rzero_series(path, a=0.1, c=0.07, horizon=50, replications=50, seed=7)
    t0, effective0, basic0 = series[0]
    assert t0 == 0 and basic0 is not None and approx(basic0, 0.1 / 0.07)
    assert all(eff <= basic + 1e-12 for (_, eff, basic) in series if basic is not None)

    # renewal estimation with the matched geometric profile recovers the
    # reproduction number in the growth phase
    weights = m.geometric_profile(c=0.07, support=100)
    assert math.isclose(sum(weights), 1.0, rel_tol=1e-9)
    growth = m.simulate(a=0.14, c=0.07, n=2_000_000_000, i0=20, horizon=150, seed=3)
    inst = m.instantaneous_r(growth.incidence(), weights, window=7)
    late = [row[2] for row in inst[-30:]]
    assert approx(sorted(late)[len(late) // 2], 2.0, rel=0.15)
    logn = m.serial_interval_profile("lognormal", mean=4.5, sd=2.5, support=100)
    assert math.isclose(sum(logn), 1.0, rel_tol=1e-9)

    # autoregression returns one coefficient per lag
    coefs, r_ar = m.ar_estimate(growth.incidence(), 7)
    assert len(coefs) == 7 and math.isclose(sum(coefs), r_ar, rel_tol=1e-12)

    # conjugate posterior concentrates near the simulation truth
    post = m.posterior(path)
    assert post["r0_mean"] is not None and approx(post["r0_mean"], 0.1 / 0.07)
    assert post["r0_q05"] < post["r0_q50"] < post["r0_q95"]

    # deterministic limit: the final-size root matches the long trajectory
    x_inf = m.final_size(a=0.015, c=0.01, y0=1e-5)
    traj = m.trajectory(a=0.015, c=0.01, horizon=20_000, y0=1e-5)
    assert abs(traj[-1][0] - x_inf) < 1e-3
    assert 0.40 < x_inf < 0.45  # R0 = 1.5 leaves ~42% never infected

    # replication study reproduces the design parameters on average
    study = m.mc_study(a=0.14, c=0.07, n=100_000, i0=100, horizon=20,
                       replications=200, seed=11)
    assert approx(study["a"]["mean"], 0.14, rel=0.05)
    assert approx(study["c"]["mean"], 0.07, rel=0.05)
    assert abs(study["rho_ac"]) < 0.3

    print("smoke test: all checks passed")


if __name__ == "__main__":
    main()
