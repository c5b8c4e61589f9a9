"""ac Stark shift of the qubit at 6.275 GHz from drives on the modes near 6.003 and 6.588 GHz.

The model places its modes a few tens of MHz from the measured ones, which
matters next to the chi poles, so the drive and mode sit at the measured
frequencies while g and kappa come from the nearest model mode.
"""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from lhcqed.coupling import QubitCircuit, residue_couplings
from lhcqed.device import load_bundled
from lhcqed.hamiltonian import CoupledSystemSpec, TransmonSpec, flux_for_f01, transition_frequencies
from lhcqed.metamaterial import build_hybrid_network, spectrum
from lhcqed.modes import catalog
from lhcqed.network import FrequencyGrid
from lhcqed.stark import StarkScenario, chi, stark_map

GHZ = 2 * np.pi * 1e9
MHZ = 2 * np.pi * 1e6


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="figures")
    p.add_argument("--qubit-ghz", type=float, default=6.275)
    p.add_argument("--formula", choices=("reported", "standard"), default="reported")
    args = p.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    dev = load_bundled("paper-device")
    t = TransmonSpec(dev.qubit.E_C_GHz, dev.qubit.E_J0_GHz)
    eta = transition_frequencies(CoupledSystemSpec(t), flux_for_f01(t, args.qubit_ghz))[2]
    cat = catalog(spectrum(dev.resonator_spec(), FrequencyGrid.from_ghz(5.8, 7.0, 200001)))
    w = np.linspace(cat.omegas[0] * 0.995, cat.omegas[-1] * 1.005, 200001)
    recs = residue_couplings(build_hybrid_network(dev.resonator_spec(), w), QubitCircuit.from_device(dev, with_readout=False))
    rw = np.array([r.omega for r in recs])

    fig, ax = plt.subplots(1, 2, figsize=(10, 4))
    for f_mode in (6.003, 6.588):
        i = cat.nearest(GHZ * f_mode)
        mode = cat[i]
        g = recs[int(np.argmin(np.abs(rw - mode.omega)))].g_halfsplit
        s = StarkScenario(GHZ * args.qubit_ghz, GHZ * eta, GHZ * f_mode, mode.kappa, g, GHZ * f_mode, MHZ)
        c = chi(s, args.formula)
        print(f"mode {f_mode} GHz (model {mode.f_ghz:.4f}): g/2pi = {g / MHZ:.2f} MHz, chi/2pi = {c / MHZ:+.4f} MHz/photon")
        m = stark_map(s, "power", np.linspace(0, 1, 51), formula=args.formula, calibration=MHZ**2)
        ax[0].plot(m.sweep, m.shift / MHZ, label=f"{f_mode} GHz")
        wd = np.linspace(s.omega_i - 5 * mode.kappa, s.omega_i + 5 * mode.kappa, 401)
        mf = stark_map(s, "frequency", wd, formula=args.formula)
        ax[1].plot((wd - s.omega_i) / MHZ, mf.shift / MHZ, label=f"{f_mode} GHz")
    ax[0].set_xlabel("drive power (arb.)")
    ax[0].set_ylabel("shift/2pi (MHz)")
    ax[1].set_xlabel("drive detuning from mode (MHz)")
    for a in ax:
        a.legend()
    fig.tight_layout()
    fig.savefig(out / "stark_shift.png", dpi=150)


if __name__ == "__main__":
    main()
