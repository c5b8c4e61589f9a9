"""Command-line workbench.

Every subcommand reads a device description, runs one sweep and writes a CSV
file ``<out>/<subcommand>.csv`` whose first line is a metadata comment with
the tool version, the seed and a hash of the inputs. Results are cached by
that hash.

Exit status: 0 success, 1 invalid input, 2 numeric or fit failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import shutil
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    ConfigurationError,
    DomainError,
    FitError,
    NumericError,
    ResolutionError,
    SingularityError,
    ValidationError,
)

log = logging.getLogger("lhcqed")

INPUT_ERRORS = (ValidationError, ConfigurationError, DomainError, FileNotFoundError, json.JSONDecodeError)
NUMERIC_ERRORS = (NumericError, FitError, ResolutionError, SingularityError, ArithmeticError)

# per-subcommand grid defaults (GHz, points); None falls back to the device sweep section
GRID_DEFAULTS = {
    "spectrum": (None, None, None),
    "dispersion": (1.0, 40.0, 4001),
    "modes": (5.8, 10.0, 400001),
    "rabi-map": (None, None, 2001),
    "fit-g": (5.8, None, 400001),
    "t1": (3.5, 9.5, 60001),
    "stark": (None, None, 201),
    "design-scan": (None, None, 200001),
}


def _csv_rows(header, rows):
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(r))
    return "\n".join(lines) + "\n"


def _fmt(x, spec=".12g"):
    return format(float(x), spec)


# ------------------------------------------------------------ subcommands


def _grid(dev, args, name):
    from .network import FrequencyGrid

    dmin, dmax, dpts = GRID_DEFAULTS[name]
    fmin = args.fmin if args.fmin is not None else (dmin if dmin is not None else dev.sweep.fmin_GHz)
    fmax = args.fmax if args.fmax is not None else (dmax if dmax is not None else dev.sweep.fmax_GHz)
    pts = args.points if args.points is not None else (dpts if dpts is not None else dev.sweep.points)
    if not fmin < fmax or pts < 2:
        raise DomainError("need fmin < fmax and at least 2 points")
    return FrequencyGrid.from_ghz(fmin, fmax, pts)


def _resonator(dev, args):
    return dev.design_spec() if getattr(args, "design", False) else dev.resonator_spec()


def _transmon(dev):
    from .hamiltonian import TransmonSpec

    q = dev.qubit
    return TransmonSpec(q.E_C_GHz, q.E_J0_GHz)


def run_spectrum(dev, args):
    from .metamaterial import spectrum

    tr = spectrum(_resonator(dev, args), _grid(dev, args, "spectrum"))
    rows = ((_fmt(f, ".9f"), _fmt(db, ".9g"), _fmt(s.real), _fmt(s.imag)) for f, db, s in zip(tr.f_ghz, tr.db, tr.s21))
    return _csv_rows(["f_GHz", "S21_dB", "S21_re", "S21_im"], rows)


def run_dispersion(dev, args):
    from .metamaterial import dispersion

    cell = dev.with_design().cell(lossy=False) if args.design else dev.cell(lossy=False)
    d = dispersion(cell, _grid(dev, args, "dispersion"))
    rows = (
        (_fmt(f, ".9f"), _fmt(k.real), _fmt(k.imag), str(int(p)), _fmt(z.real), _fmt(z.imag))
        for f, k, p, z in zip(d.f_ghz, d.kdx, d.passband, d.z0l)
    )
    return _csv_rows(["f_GHz", "kdx_re", "kdx_im", "passband", "Z0l_re", "Z0l_im"], rows)


def _catalog(dev, args, name):
    from .metamaterial import spectrum
    from .modes import catalog

    tr = spectrum(_resonator(dev, args), _grid(dev, args, name))
    cat = catalog(tr, prominence=dev.sweep.prominence)
    for w in cat.warnings:
        log.warning(w)
    return cat


def run_modes(dev, args):
    return _catalog(dev, args, "modes").to_csv()


def _residue(dev, args, cat):
    from .coupling import QubitCircuit, residue_couplings
    from .metamaterial import build_hybrid_network

    if not len(cat):
        raise DomainError("no modes in the requested window")
    d = dev.with_design() if args.design else dev
    lo, hi = cat.omegas.min() * 0.995, cat.omegas.max() * 1.005
    w = np.linspace(lo, hi, 200001)
    net = build_hybrid_network(_resonator(dev, args), w)
    recs = residue_couplings(net, QubitCircuit.from_device(d, with_readout=False), _transmon(d))
    # index residue records by the nearest catalog mode
    out = {}
    for r in recs:
        i = cat.nearest(r.omega)
        if abs(cat.omegas[i] - r.omega) < 0.5 * max(cat[i].kappa, 1e-4 * r.omega):
            out[i] = r
    return out


def run_rabi_map(dev, args):
    from .hamiltonian import CoupledSystemSpec, ModeSpec, f01_bare, spectral_lines

    d = dev.with_design() if args.design else dev
    t = _transmon(d)
    cat = _catalog(dev, args, "modes")
    grid = _grid(dev, args, "rabi-map")
    window = cat.between(grid.omega[0], grid.omega[-1])
    res = _residue(dev, args, cat)
    picked = [i for i in range(len(cat)) if grid.omega[0] <= cat.omegas[i] <= grid.omega[-1] and i in res]
    picked = picked[: args.max_modes]
    if not picked:
        raise DomainError("no modes in the requested window")
    modes = tuple(ModeSpec(cat.omegas[i], res[i].g_prefactor, args.fock) for i in picked)
    spec = CoupledSystemSpec(t, modes)
    fmax = f01_bare(t, 0.0)[0]
    if window.f_ghz.min() >= fmax:
        raise DomainError("modes lie above the maximum qubit frequency")
    flux = np.linspace(0.0, 0.5, args.flux_points)
    lines = spectral_lines(spec, flux, n_levels=1 + 2 * len(modes))
    rows = ((_fmt(p, ".9g"), _fmt(f, ".9f"), _fmt(wt, ".6g")) for p, f, wt in lines)
    return _csv_rows(["flux", "f_GHz", "weight"], rows)


def run_fit_g(dev, args):
    from .coupling import CouplingSet, QubitCircuit, couplings_for_catalog
    from .hamiltonian import f01_bare

    d = dev.with_design() if args.design else dev
    t = _transmon(d)
    fmax = f01_bare(t, 0.0)[0] * 2 * np.pi * 1e9
    if args.fmax is None:
        args.fmax = float(d.qubit.f01_max_GHz) + 0.5
    cat = _catalog(dev, args, "fit-g")
    if args.method == "residue":
        res = _residue(dev, args, cat)
        recs = tuple(replace(res[i], mode_index=i) for i in sorted(res) if cat.omegas[i] <= fmax)
        cs = CouplingSet(recs, E_J0=t.E_J0)
    else:
        cs = couplings_for_catalog(_resonator(dev, args), QubitCircuit.from_device(d), cat, transmon=t, omega_max=fmax)
        for w in cs.warnings:
            log.warning(w)
    return cs.to_csv()


def run_t1(dev, args):
    from .purcell import EnvironmentSpec, calibrate_floor, t1_curve
    from .units import fF

    env = EnvironmentSpec.from_device(dev)
    A = calibrate_floor(args.t1_ref_us * 1e-6, args.f_ref_ghz * 1e9)
    q = dev.qubit
    return t1_curve(env, q.C_Q_fF * fF, q.C_J_fF * fF, _grid(dev, args, "t1"), A=A).to_csv()


def run_stark(dev, args):
    from .hamiltonian import CoupledSystemSpec, flux_for_f01, transition_frequencies
    from .stark import StarkScenario, stark_map

    t = _transmon(dev)
    _, _, eta = transition_frequencies(CoupledSystemSpec(t), flux_for_f01(t, args.qubit_ghz))
    ns = argparse.Namespace(**{**vars(args), "fmin": None, "fmax": None, "points": None})
    cat = _catalog(dev, ns, "modes")
    i = cat.nearest(2 * np.pi * args.mode_ghz * 1e9)
    res = _residue(dev, ns, cat)
    if i not in res:
        raise ResolutionError(f"no coupling found for the mode near {args.mode_ghz} GHz")
    mode = cat[i]
    two_pi = 2 * np.pi
    s = StarkScenario(
        omega_q=two_pi * args.qubit_ghz * 1e9,
        eta=two_pi * eta * 1e9,
        omega_i=mode.omega,
        kappa_i=mode.kappa,
        g_i=res[i].g_halfsplit,
        omega_d=mode.omega,
        Omega=two_pi * args.omega_mhz * 1e6,
    )
    pts = args.points or GRID_DEFAULTS["stark"][2]
    if args.axis == "power":
        values = np.linspace(0.0, 1.0, pts)
        m = stark_map(s, "power", values, formula=args.formula, calibration=s.Omega**2)
    else:
        values = np.linspace(mode.omega - 5 * mode.kappa, mode.omega + 5 * mode.kappa, pts)
        m = stark_map(s, "frequency", values, formula=args.formula)
    return m.to_csv()


def run_design_scan(dev, args):
    from .coupling import superstrong_ratio

    if dev.design is None:
        raise DomainError("device has no design section")
    args.design = True
    lo, hi = dev.design.window_GHz
    if args.fmin is None:
        args.fmin = lo - 0.3
    if args.fmax is None:
        args.fmax = hi + 0.3
    cat = _catalog(dev, args, "design-scan")
    res = _residue(dev, args, cat)
    idx = [i for i in range(len(cat)) if i in res]
    ratios = superstrong_ratio([res[i].g_halfsplit for i in idx], cat.omegas[idx])
    rows = []
    for k, i in enumerate(idx):
        f = cat.f_ghz[i]
        if not lo <= f <= hi or ratios[k] is None:
            continue
        r = res[i]
        spacing = (cat.omegas[idx[k + 1]] - cat.omegas[i]) / (2 * np.pi * 1e6)
        rows.append(
            (
                str(i),
                _fmt(f, ".9f"),
                _fmt(r.g_prefactor / (2 * np.pi * 1e6), ".6f"),
                _fmt(r.g_halfsplit / (2 * np.pi * 1e6), ".6f"),
                _fmt(spacing, ".6f"),
                _fmt(ratios[k], ".6f"),
            )
        )
    return _csv_rows(["mode_index", "f_GHz", "g_MHz_prefactor", "g_MHz_halfsplit", "spacing_MHz", "g_over_spacing"], rows)


COMMANDS = {
    "spectrum": run_spectrum,
    "dispersion": run_dispersion,
    "modes": run_modes,
    "rabi-map": run_rabi_map,
    "fit-g": run_fit_g,
    "t1": run_t1,
    "stark": run_stark,
    "design-scan": run_design_scan,
}


# ------------------------------------------------------------ plumbing


def build_parser():
    p = argparse.ArgumentParser(prog="lhcqed", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--device", default="paper-device", help="JSON path or bundled name")
        s.add_argument("--out", default=".", help="output directory")
        s.add_argument("--fmin", type=float, help="GHz")
        s.add_argument("--fmax", type=float, help="GHz")
        s.add_argument("--points", type=int)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--no-cache", action="store_true")
        s.add_argument("--design", action="store_true", help="apply the device's design overrides")
        if name == "rabi-map":
            s.add_argument("--flux-points", type=int, default=101)
            s.add_argument("--max-modes", type=int, default=3)
            s.add_argument("--fock", type=int, default=3, help="Fock truncation m_max per mode")
        if name == "fit-g":
            s.add_argument("--method", choices=("semiclassical", "residue"), default="semiclassical")
        if name == "t1":
            s.add_argument("--t1-ref-us", type=float, default=13.0)
            s.add_argument("--f-ref-ghz", type=float, default=4.5)
        if name == "stark":
            s.add_argument("--qubit-ghz", type=float, default=6.275)
            s.add_argument("--mode-ghz", type=float, default=6.003)
            s.add_argument("--omega-mhz", type=float, default=1.0, help="drive amplitude at full power")
            s.add_argument("--axis", choices=("power", "frequency"), default="power")
            s.add_argument("--formula", choices=("reported", "standard"), default="reported")
    return p


def input_hash(dev, args):
    manifest = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "no_cache", "device")}
    blob = json.dumps({"device": dev.to_dict(), "manifest": manifest, "version": __version__}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def run(args) -> Path:
    from .device import parse_device

    dev = parse_device(args.device)
    digest = input_hash(dev, args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / f"{args.command}.csv"
    cache = out_dir / ".cache" / f"{digest}.csv"
    if not args.no_cache and cache.exists():
        shutil.copyfile(cache, target)
        log.info("cache hit %s", digest[:12])
        return target
    np.random.seed(args.seed)
    body = COMMANDS[args.command](dev, args)
    header = f"# lhcqed {__version__} command={args.command} input_sha256={digest} seed={args.seed}\n"
    target.write_text(header + body, encoding="utf-8")
    if not args.no_cache:
        cache.parent.mkdir(exist_ok=True)
        shutil.copyfile(target, cache)
    return target


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        path = run(args)
    except INPUT_ERRORS as exc:
        print(f"lhcqed {args.command}: invalid input: {exc}", file=sys.stderr)
        return 1
    except NUMERIC_ERRORS as exc:
        print(f"lhcqed {args.command}: numeric failure: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
