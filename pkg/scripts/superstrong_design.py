"""Hypothetical superstrong device: modes, couplings and g/spacing, plus a four-mode spectrum."""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from lhcqed.coupling import QubitCircuit, residue_couplings, superstrong_ratio
from lhcqed.device import load_bundled
from lhcqed.hamiltonian import CoupledSystemSpec, ModeSpec, TransmonSpec, flux_for_f01, rabi_map
from lhcqed.metamaterial import build_hybrid_network, spectrum
from lhcqed.modes import catalog
from lhcqed.network import FrequencyGrid

GHZ = 2 * np.pi * 1e9
MHZ = 2 * np.pi * 1e6


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="figures")
    p.add_argument("--flux-points", type=int, default=121)
    args = p.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    base = load_bundled("table2-device")
    dev = base.with_design()
    spec = base.design_spec()
    t = TransmonSpec(dev.qubit.E_C_GHz, dev.qubit.E_J0_GHz)
    cat = catalog(spectrum(spec, FrequencyGrid.from_ghz(7.5, 8.8, 200001)))
    w = np.linspace(cat.omegas[0] * 0.995, cat.omegas[-1] * 1.005, 200001)
    recs = residue_couplings(build_hybrid_network(spec, w), QubitCircuit.from_device(dev, with_readout=False), t)
    rw = np.array([r.omega for r in recs])
    ratios = superstrong_ratio([r.g_halfsplit for r in recs], rw)
    lo, hi = base.design.window_GHz
    picked = [i for i, x in enumerate(rw / GHZ) if lo <= x <= hi and ratios[i] is not None][:4]
    for i in picked:
        r = recs[i]
        print(
            f"{r.omega / GHZ:.4f} GHz  g/2pi = {r.g_halfsplit / MHZ:6.1f} MHz (prefactor {r.g_prefactor / MHZ:6.1f})"
            f"  g/spacing = {ratios[i]:.2f}"
        )

    modes = tuple(ModeSpec(recs[i].omega, recs[i].g_prefactor, 1) for i in picked)
    sysspec = CoupledSystemSpec(t, modes, transmon_levels=4)
    flux = np.linspace(flux_for_f01(t, 9.0), flux_for_f01(t, 7.0), args.flux_points)
    f = np.linspace(6.8, 9.2, 1201)
    img = rabi_map(sysspec, flux, f, linewidth_ghz=0.01, n_levels=2 + len(modes))

    fig, ax = plt.subplots(figsize=(6, 5))
    ax.pcolormesh(flux, f, np.log10(img.T + 1e-6), shading="auto", cmap="viridis")
    for m in modes:
        ax.axhline(m.f_ghz, color="w", lw=0.4, ls=":")
    ax.set_xlabel("flux (Phi0)")
    ax.set_ylabel("frequency (GHz)")
    fig.tight_layout()
    fig.savefig(out / "superstrong_design.png", dpi=150)


if __name__ == "__main__":
    main()
