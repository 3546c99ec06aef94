"""Smoke test for the hkdelay extension module."""

import math
import pathlib
import tempfile

import hkdelay

SCENARIOS = pathlib.Path(__file__).resolve().parents[2] / "core" / "scenarios"


def main():
    kernel = hkdelay.Kernel.constant()
    delay = hkdelay.Delay.constant(0.25)
    weight = hkdelay.Weight.constant(1.0, delay)
    assert kernel(3.0) == 1.0
    assert abs(weight.h(delay, 0.0) - 0.25) < 1e-12

    cert = hkdelay.certify(kernel, delay, weight, 0.5)
    assert cert["holds"], cert
    assert abs(cert["K"] - 0.2066) < 1e-3, cert

    model = hkdelay.Model(2, 1, kernel, delay, weight, dt=0.0125, t_end=5.0)
    traj = hkdelay.simulate(model, [0.0, 1.0])
    d = traj.diameters()
    assert d[0] == 1.0 and d[-1] < d[0] * math.exp(-cert["K"] * 5.0)
    diag = traj.diagnostics(cert["beta_chosen"])
    assert len(diag["t"]) == len(traj)
    assert traj.fit_decay_rate(2.5, 5.0) >= cert["K"]

    assert abs(hkdelay.wasserstein1([0.0, 1.0], [0.5, 1.5]) - 0.5) < 1e-12

    try:
        hkdelay.Delay.constant(-1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative delay accepted")

    with tempfile.TemporaryDirectory() as out:
        summary = hkdelay.run_scenario(str(SCENARIOS / "certified_pair.toml"), out)
        assert "holds=true" in summary, summary
        assert (pathlib.Path(out) / "trajectory.csv").exists()

    print("smoke test ok")


if __name__ == "__main__":
    main()
