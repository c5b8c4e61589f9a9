"""Multimode Purcell-limited T1 of the bundled paper-device with a 1/f dielectric floor."""

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
from lhcqed.purcell import EnvironmentSpec, t1_curve
from lhcqed.units import fF, us

GHZ = 2 * np.pi * 1e9


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="figures")
    p.add_argument("--points", type=int, default=120001)
    args = p.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    dev = load_bundled("paper-device")
    q = dev.qubit
    c = t1_curve(EnvironmentSpec.from_device(dev), q.C_Q_fF * fF, q.C_J_fF * fF, GHZ * np.linspace(3.5, 9.5, args.points))
    cat = catalog(spectrum(dev.resonator_spec(), FrequencyGrid.from_ghz(5.8, 9.6, 400001)))
    low = c.f_ghz < 4.5
    print(f"T1 below 4.5 GHz: {c.t1_total[low].min() / us:.2f}-{c.t1_total[low].max() / us:.2f} us")
    print(f"{len(c.dips(order=20, below=1e-6))} sub-us dips")

    fig, ax = plt.subplots(figsize=(8, 4))
    ax.semilogy(c.f_ghz, c.plot_total() / us, lw=0.7, label="total")
    ax.semilogy(c.f_ghz, c.t1_floor / us, "k--", lw=0.7, label="A/omega")
    for f in cat.f_ghz:
        ax.axvline(f, color="r", lw=0.3, alpha=0.4)
    ax.set_xlabel("qubit frequency (GHz)")
    ax.set_ylabel("T1 (us)")
    ax.set_ylim(1e-4, 100)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "purcell_t1.png", dpi=150)


if __name__ == "__main__":
    main()
