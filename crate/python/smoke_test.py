"""Smoke test for the dapkit Python extension.

Build and install first, e.g. `pip install --no-build-isolation -e crates/py`,
then run `python python/smoke_test.py` from the repository root.
"""

import math
from pathlib import Path

import dapkit

ROOT = Path(__file__).resolve().parent.parent


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def main():
    db = dapkit.MaterialsDatabase.example()
    assert "3C-SiC" in db.hosts()
    sic = db.host("3C-SiC")
    close(sic["eps_r"], 9.72, 1e-12)

    shells = dapkit.first_shells(sic["a0"], "zincblende", "opposite", 5)
    assert [s.multiplicity for s in shells] == [4, 12, 12, 16, 24]
    close(shells[0].distance, sic["a0"] * math.sqrt(3) / 4, 1e-12)
    assert len(shells[1].vectors()) == 12

    series = dapkit.zpl_series("3C-SiC", "N_C-SiC", "Al_Si-SiC", 20, with_j=False)
    fit = dapkit.fit_series([(r, e) for _, r, e in series], sic["bond_length"], sic["band_gap"])
    close(fit["binding_sum"], 0.35, 1e-9)

    model = dapkit.VibronicModel.from_huang_rhys(20.0, 65.0, 65.0, 4.0)
    spectrum = dapkit.lineshape(model, 5.0)
    assert spectrum.zpl_weight < 1e-8
    close(spectrum.area(), 1.0, 1e-6)
    # the envelope maximum sits near E_zpl - S*hbar*omega
    top = max(spectrum.peaks(), key=lambda p: p[1])
    close(top[0], 4.0 - 20.0 * 0.065, 0.07)

    s = 2.5
    dq = dapkit.VibronicModel.from_huang_rhys(s, 50.0, 50.0, 2.0).delta_q
    close(dapkit.huang_rhys(dq, 50.0), s, 1e-12)
    close(dapkit.fc_overlap(0, 3, 50.0, 50.0, dq) ** 2,
          math.exp(-s) * s**3 / 6, 1e-10)

    v = dapkit.side_by_side_interaction(15.0, 15.0, 9.72, 1000.0)
    assert 50e6 <= v <= 150e6
    close(dapkit.dipole_interaction([0, 0, 15.0], [0, 0, 15.0], [1000.0, 0, 0], 9.72), v, 1e-6 * v)

    mu, alpha = dapkit.fit_stark([(e, dapkit.stark_shift(6.5, -210.0, e)) for e in (-0.01, -0.005, 0.0, 0.005, 0.01)])
    close(mu, 6.5, 1e-9)
    close(alpha, -210.0, 1e-6)

    ground = (ROOT / "data/examples/ground.snap").read_text()
    excited = (ROOT / "data/examples/excited.snap").read_text()
    dip = dapkit.dipole_from_snapshots(ground, excited)
    close(dip["magnitude"], 2.676, 1e-9)

    tau_d = dapkit.radiative_lifetime(3.8, 1.0, 2.4)
    tau_s = dapkit.radiative_lifetime(2.2, 1.0 / math.sqrt(10.0), 2.4)
    assert 50 <= tau_s / tau_d <= 100

    rows = dapkit.ctl_table(
        (ROOT / "data/records/3C-SiC.csv").read_text(),
        (ROOT / "data/records/chempots.toml").read_text(),
        "3C-SiC",
    )
    assert [r["reference"] for r in rows] == ["E_V + 0.19", "E_V + 0.57", "E_C - 0.16"]

    try:
        dapkit.j_correction(-1.0, 1.0, 1.0, 9.72)
    except dapkit.DapkitError as e:
        assert str(e).startswith("domain:")
    else:
        raise AssertionError("negative separation accepted")

    print(f"dapkit {dapkit.__version__} python smoke test: ok")


if __name__ == "__main__":
    main()
