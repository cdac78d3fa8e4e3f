"""Command-line entry point.

Subcommands::

    fiberpert kernel   -c run.toml [--nu N] [--emit-kernel PATH] ...
    fiberpert model    -c run.toml [--model reg-td] --out received.npz
    fiberpert ssfm     -c run.toml --out received.npz [--dump-field f.fsig]
    fiberpert sweep    -c run.toml --out sweep.csv [--workers N]
    fiberpert validate -c run.toml [--model reglog-td] [--out point.csv]

``kernel`` builds (and optionally caches) the aliased kernel of one channel
and prints its energy decomposition.  ``model`` runs one channel model on a
seeded random symbol sequence.  ``ssfm`` runs the split-step reference.
``sweep`` evaluates the config's sweep grid and writes CSV.  ``validate``
runs model and reference on the same sequence and reports the interior
mean-squared error; its exit code is 0 only when the point completed.
"""

import argparse
import logging
import sys

import numpy as np

from .config import load_config, sweep_grid
from .kernels import (kernel_energies, kernel_hash, kernel_time_domain,
                      write_kernel_grid, write_kernel_sparse)
from .link import characteristic_quantities
from .sweep import (SweepResult, build_kernel_grid, build_model_input,
                    emit_csv, evaluate_point, resolved_n_fft, run_model,
                    run_reference, run_sweep, transmit_symbols)

log = logging.getLogger(__name__)


def _common(parser):
    parser.add_argument("-c", "--config", required=True,
                        help="TOML configuration file")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="verbose logging")
    parser.add_argument("--cache-dir", default=None,
                        help="kernel cache directory (overrides config)")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--n-fft", type=int, default=None)
    parser.add_argument("--power-dbm", type=float, default=None,
                        help="probe launch power override")


def _overrides(args, with_model=False):
    ov = {}
    if args.cache_dir is not None:
        ov["cache_dir"] = args.cache_dir
    if args.seed is not None:
        ov["seed"] = args.seed
    if args.n_fft is not None:
        ov["n_fft"] = args.n_fft
    if args.power_dbm is not None:
        ov["power_dbm"] = args.power_dbm
    if with_model and getattr(args, "model", None):
        ov["model"] = args.model
    return ov


def _cmd_kernel(args):
    cfg = load_config(args.config, _overrides(args))
    nu = args.nu if args.nu is not None else cfg.plan.probe
    n_fft = resolved_n_fft(cfg) * cfg.kernel_oversample
    grid = build_kernel_grid(cfg, nu, n_fft)
    td = kernel_time_domain(grid, cfg.clip_ratio(nu))
    en = kernel_energies(td, grid, is_probe=(nu == cfg.plan.probe))
    cq = characteristic_quantities(cfg.link, cfg.plan)
    print(f"channel {nu}  n_fft {n_fft}  entries {len(td.values)} "
          f"(clip {cfg.clip_db:.1f} dB)  memory {td.memory()} symbols")
    print(f"map strength {cq.map_strength_nu[nu]:.3f}  "
          f"phi_nl {cq.phi_nl[nu]:.4e} rad")
    print(f"E_h  total {en.td.total:.6f}  additive {en.td.additive:.6f}  "
          f"multiplicative {en.td.multiplicative:.6f}")
    print(f"E_H  total {en.fd.total:.6f}  additive {en.fd.additive:.6f}  "
          f"multiplicative {en.fd.multiplicative:.6f}")
    if args.emit_kernel or args.emit_sparse:
        digest = kernel_hash(cfg.link, cfg.plan, nu, n_fft)
        if args.emit_kernel:
            write_kernel_grid(args.emit_kernel, grid, digest)
            print(f"kernel grid written to {args.emit_kernel}")
        if args.emit_sparse:
            write_kernel_sparse(args.emit_sparse, td, digest)
            print(f"clipped time-domain kernel written to {args.emit_sparse}")
    return 0


def _cmd_model(args):
    cfg = load_config(args.config, _overrides(args, with_model=True))
    probe, interferers = transmit_symbols(cfg)
    inp, frame, _ = build_model_input(cfg, probe, interferers)
    y = run_model(cfg, inp, frame)
    np.savez(args.out, transmitted=probe, received=y,
             **{f"interferer_{nu}": b for nu, b in interferers.items()})
    print(f"{cfg.model} on {cfg.n_sym} symbols -> {args.out}")
    return 0


def _cmd_ssfm(args):
    cfg = load_config(args.config, _overrides(args))
    probe, interferers = transmit_symbols(cfg)
    y = run_reference(cfg, probe, interferers)
    np.savez(args.out, transmitted=probe, received=y)
    if args.dump_field:
        from .ssfm import StepPolicy, propagate, wdm_mux
        from .txrx import modulate
        fields, offsets = [], []
        for nu, ch in enumerate(cfg.plan.channels):
            sym = probe if nu == cfg.plan.probe else interferers[nu]
            fields.append(modulate(sym, ch.symbol_rate, ch.rolloff, ch.power,
                                   cfg.default_oversampling))
            offsets.append(ch.offset)
        field = wdm_mux(fields, offsets) if len(fields) > 1 else fields[0]
        propagate(field, cfg.link, StepPolicy(cfg.phi_max),
                  dump_path=args.dump_field)
        print(f"output field dumped to {args.dump_field}")
    print(f"split-step reference on {cfg.n_sym} symbols -> {args.out}")
    return 0


def _cmd_sweep(args):
    if sys.version_info >= (3, 11):
        import tomllib
    else:
        import tomli as tomllib
    with open(args.config, "rb") as f:
        raw = tomllib.load(f)
    grid = sweep_grid(raw)
    if not grid:
        print("config has no [sweep] table", file=sys.stderr)
        return 2
    ov = _overrides(args)
    if ov:
        raw.setdefault("model", {}).update(
            {k: v for k, v in ov.items() if k in ("seed", "n_fft", "cache_dir")})
        if "power_dbm" in ov:
            probe_key = next(k for k, v in raw.get("channels", {"0": {}}).items()
                             if float(v.get("offset_ghz", 0.0)) == 0.0)
            raw["channels"][probe_key]["power_dbm"] = ov["power_dbm"]
    result = run_sweep(raw, grid, max_workers=args.workers)
    emit_csv(result, args.out)
    n_err = sum(1 for r in result.rows if r.error)
    print(f"{len(result.rows)} points -> {args.out}"
          + (f" ({n_err} failed)" if n_err else ""))
    return 0 if result.ok else 1


def _cmd_validate(args):
    cfg = load_config(args.config, _overrides(args, with_model=True))
    res = evaluate_point(cfg)
    if res.error:
        print(f"FAILED: {res.error}")
        return 1
    print(f"{cfg.model}: sigma_e^2 = {res.sigma_e2_db:.2f} dB  "
          f"(rx power offset {res.rx_power_offset_db:.3f} dB, "
          f"kernel {res.t_kernel:.2f}s model {res.t_model:.2f}s "
          f"ssfm {res.t_ssfm:.2f}s)")
    if args.out:
        emit_csv(SweepResult(rows=[res]), args.out)
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="fiberpert",
        description="End-to-end fiber-optic channel models and validation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kernel", help="build a kernel, print energies")
    _common(p)
    p.add_argument("--nu", type=int, default=None,
                   help="channel index (default: probe)")
    p.add_argument("--emit-kernel", default=None,
                   help="write the aliased kernel grid to this path")
    p.add_argument("--emit-sparse", default=None,
                   help="also write the clipped time-domain kernel")
    p.set_defaults(func=_cmd_kernel)

    p = sub.add_parser("model", help="run one channel model")
    _common(p)
    p.add_argument("--model", choices=("reg-td", "reg-fd", "reglog-td",
                                       "reglog-fd"), default=None)
    p.add_argument("--out", required=True, help="output .npz path")
    p.set_defaults(func=_cmd_model)

    p = sub.add_parser("ssfm", help="run the split-step reference")
    _common(p)
    p.add_argument("--out", required=True, help="output .npz path")
    p.add_argument("--dump-field", default=None,
                   help="write the output field checkpoint here")
    p.set_defaults(func=_cmd_ssfm)

    p = sub.add_parser("sweep", help="evaluate the sweep grid, write CSV")
    _common(p)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("validate", help="paired model-vs-reference error")
    _common(p)
    p.add_argument("--model", choices=("reg-td", "reg-fd", "reglog-td",
                                       "reglog-fd"), default=None)
    p.add_argument("--out", default=None, help="optional single-row CSV")
    p.set_defaults(func=_cmd_validate)

    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
