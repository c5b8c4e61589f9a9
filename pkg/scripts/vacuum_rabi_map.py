"""Multimode vacuum Rabi splittings: synthetic spectroscopy vs flux near the modes around 7.8 GHz."""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from lhcqed.coupling import QubitCircuit, residue_couplings
from lhcqed.device import load_bundled
from lhcqed.hamiltonian import CoupledSystemSpec, ModeSpec, TransmonSpec, flux_for_f01, rabi_map
from lhcqed.metamaterial import build_hybrid_network, spectrum
from lhcqed.modes import catalog
from lhcqed.network import FrequencyGrid

GHZ = 2 * np.pi * 1e9


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="figures")
    p.add_argument("--fmin", type=float, default=7.2)
    p.add_argument("--fmax", type=float, default=8.4)
    p.add_argument("--flux-points", type=int, default=151)
    args = p.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    dev = load_bundled("paper-device")
    t = TransmonSpec(dev.qubit.E_C_GHz, dev.qubit.E_J0_GHz)
    cat = catalog(spectrum(dev.resonator_spec(), FrequencyGrid.from_ghz(args.fmin, args.fmax, 100001)))
    w = np.linspace(cat.omegas[0] * 0.995, cat.omegas[-1] * 1.005, 100001)
    recs = residue_couplings(build_hybrid_network(dev.resonator_spec(), w), QubitCircuit.from_device(dev, with_readout=False), t)
    # single-excitation lines need one photon per mode and a few transmon levels
    modes = tuple(ModeSpec(r.omega, r.g_prefactor, 1) for r in recs)
    spec = CoupledSystemSpec(t, modes, transmon_levels=4)

    flux = np.linspace(flux_for_f01(t, args.fmax), flux_for_f01(t, args.fmin), args.flux_points)
    f = np.linspace(args.fmin, args.fmax, 1201)
    img = rabi_map(spec, flux, f, linewidth_ghz=0.004, n_levels=2 + len(modes))

    fig, ax = plt.subplots(figsize=(6, 5))
    ax.pcolormesh(flux, f, np.log10(img.T + 1e-6), shading="auto", cmap="viridis")
    ax.set_xlabel("flux (Phi0)")
    ax.set_ylabel("frequency (GHz)")
    fig.tight_layout()
    fig.savefig(out / "vacuum_rabi_map.png", dpi=150)


if __name__ == "__main__":
    main()
