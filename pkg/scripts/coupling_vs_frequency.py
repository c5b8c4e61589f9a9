"""Coupling g_i of the bundled paper-device: semiclassical splittings up to the sweet spot, residues up to 20 GHz."""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from lhcqed.coupling import QubitCircuit, couplings_for_catalog, residue_couplings
from lhcqed.device import load_bundled
from lhcqed.hamiltonian import TransmonSpec, f01_bare
from lhcqed.metamaterial import build_hybrid_network, spectrum
from lhcqed.modes import catalog
from lhcqed.network import FrequencyGrid

GHZ = 2 * np.pi * 1e9
MHZ = 2 * np.pi * 1e6


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="figures")
    p.add_argument("--fmax-ext", type=float, default=20.0, help="upper edge of the extended sweep (GHz)")
    args = p.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    dev = load_bundled("paper-device")
    spec = dev.resonator_spec()
    t = TransmonSpec(dev.qubit.E_C_GHz, dev.qubit.E_J0_GHz)
    cat = catalog(spectrum(spec, FrequencyGrid.from_ghz(5.8, 9.75, 400001)))
    fmax = GHZ * f01_bare(t, 0.0)[0]
    semi = couplings_for_catalog(spec, QubitCircuit.from_device(dev), cat, transmon=t, omega_max=fmax)
    w = GHZ * np.linspace(5.85, args.fmax_ext, 600001)
    ext = residue_couplings(build_hybrid_network(spec, w), QubitCircuit.from_device(dev, with_readout=False), t)

    for r in semi:
        print(f"{r.omega / GHZ:8.4f} GHz  g/2pi = {r.g_halfsplit / MHZ:7.2f} MHz (half-split)")

    fig, ax = plt.subplots(1, 2, figsize=(10, 4))
    ax[0].plot(semi.omegas / GHZ, semi.g() / MHZ, "o-", ms=3, label="splitting, with readout")
    ax[0].plot([r.omega / GHZ for r in ext], [r.g_halfsplit / MHZ for r in ext], "s", ms=3, mfc="none", label="residue")
    ax[0].set_xlim(5.8, fmax / GHZ)
    ax[0].set_xlabel("mode frequency (GHz)")
    ax[0].set_ylabel("g/2pi (MHz)")
    ax[0].legend()
    ax[1].plot([r.omega / GHZ for r in ext], [r.g_halfsplit / MHZ for r in ext], "o-", ms=3)
    ax[1].set_xlabel("mode frequency (GHz)")
    ax[1].set_ylabel("g/2pi (MHz)")
    fig.tight_layout()
    fig.savefig(out / "coupling_vs_frequency.png", dpi=150)


if __name__ == "__main__":
    main()
