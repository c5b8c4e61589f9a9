"""Transmission of the bundled paper-device and its mode catalog: |S21|, Q and spacing vs frequency."""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from lhcqed.device import load_bundled
from lhcqed.metamaterial import spectrum
from lhcqed.modes import catalog
from lhcqed.network import FrequencyGrid


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="figures")
    p.add_argument("--points", type=int, default=400001)
    args = p.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    dev = load_bundled("paper-device")
    tr = spectrum(dev.resonator_spec(), FrequencyGrid.from_ghz(4.0, 10.0, args.points))
    cat = catalog(tr)
    print(f"{len(cat)} modes, {int(np.sum(cat.f_ghz < 9.25))} below 9.25 GHz")
    for r in cat.records:
        print(f"  {r.f_ghz:8.4f} GHz  Q = {r.q:9.0f}")

    fig, ax = plt.subplots(3, 1, figsize=(7, 8), sharex=True)
    ax[0].plot(tr.f_ghz, tr.db, lw=0.6)
    ax[0].plot(cat.f_ghz, [tr.db[np.argmin(np.abs(tr.omega - w))] for w in cat.omegas], "r.", ms=4)
    ax[0].set_ylabel("|S21| (dB)")
    ax[1].semilogy(cat.f_ghz, [r.q for r in cat.records], "o-", ms=3)
    ax[1].set_ylabel("loaded Q")
    ax[2].plot(cat.f_ghz[:-1], np.diff(cat.f_ghz) * 1e3, "o-", ms=3)
    ax[2].set_ylabel("spacing (MHz)")
    ax[2].set_xlabel("frequency (GHz)")
    fig.tight_layout()
    fig.savefig(out / "spectrum_and_modes.png", dpi=150)


if __name__ == "__main__":
    main()
