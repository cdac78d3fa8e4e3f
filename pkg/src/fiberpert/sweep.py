"""Validation harness: single-point model-vs-reference evaluation, sweep
orchestration over parameter grids, kernel caching, and CSV emission.

Every sweep point runs the full pipeline (kernel build, model evaluation,
split-step reference, matched-filter receiver, interior mean-squared error)
for one resolved configuration.  Kernels are cached on disk keyed by a hash
of everything that enters them; launch powers do not, so a power sweep
rebuilds nothing.  Points are independent jobs; results are gathered in grid
order regardless of scheduling.
"""

import csv
import itertools
import logging
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import config_from_dict, config_hash
from .kernels import (alias_kernel, default_n_fft, kernel_energies,
                      kernel_hash, kernel_time_domain, read_kernel_grid,
                      write_kernel_grid)
from .link import characteristic_quantities
from .models import (BlockFrame, ModelInput, reg_fd, reg_td, reglog_fd,
                     reglog_td)
from .ssfm import StepPolicy, propagate, wdm_mux
from .txrx import generate_symbols, modulate, mse, receiver_frontend

log = logging.getLogger(__name__)

# CSV layout is versioned via the leading column name; keep order stable
CSV_VERSION = 1
CSV_COLUMNS = (
    "config_hash", "model", "rs_gbd", "p_dbm", "rolloff", "n_spans",
    "n_sym", "n_fft", "sigma_e2 [dB]",
    "E_h total", "E_h additive", "E_h multiplicative",
    "E_H total", "E_H additive", "E_H multiplicative",
    "rx_power_offset [dB]", "t_kernel [s]", "t_model [s]", "t_ssfm [s]",
    "error",
)


@dataclass
class PointResult:
    """Outcome of one sweep point."""

    config_hash: str
    params: dict
    sigma_e2_db: float = float("nan")
    energies: object = None
    rx_power_offset_db: float = float("nan")
    t_kernel: float = 0.0
    t_model: float = 0.0
    t_ssfm: float = 0.0
    error: str = ""


@dataclass
class SweepResult:
    """Grid-ordered collection of point results."""

    rows: list

    @property
    def ok(self):
        return all(not r.error for r in self.rows)


def resolved_n_fft(cfg):
    return cfg.n_fft or default_n_fft(cfg.link, cfg.plan)


def _cache_path(cfg, nu, n_fft):
    if not cfg.cache_dir:
        return None
    digest = kernel_hash(cfg.link, cfg.plan, nu, n_fft).hex()[:24]
    return os.path.join(cfg.cache_dir, f"kernel-{digest}.fkrn")


def build_kernel_grid(cfg, nu, n_fft):
    """Aliased kernel grid for channel ``nu``, via the disk cache if set."""
    path = _cache_path(cfg, nu, n_fft)
    if path is not None and os.path.exists(path):
        grid, _ = read_kernel_grid(path)
        log.info("kernel cache hit for channel %d (%s)", nu,
                 os.path.basename(path))
        return grid
    grid = alias_kernel(cfg.link, cfg.plan, nu, n_fft)
    if path is not None:
        os.makedirs(cfg.cache_dir, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=cfg.cache_dir, suffix=".tmp")
        os.close(fd)
        try:
            write_kernel_grid(tmp, grid, kernel_hash(cfg.link, cfg.plan, nu,
                                                     n_fft))
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
    return grid


def build_model_input(cfg, symbols, interferer_symbols=None):
    """
    Assemble kernels, nonlinear phases, and sequences for a model run.

    Returns ``(ModelInput, BlockFrame, build_seconds)``.
    """
    t0 = time.perf_counter()
    n_fft = resolved_n_fft(cfg)
    kernel_n = n_fft * cfg.kernel_oversample
    cq = characteristic_quantities(cfg.link, cfg.plan)
    phi = {nu: cq.phi_nl[nu] for nu in range(len(cfg.plan.channels))}
    grids, tds = {}, {}
    for nu in range(len(cfg.plan.channels)):
        grid = build_kernel_grid(cfg, nu, kernel_n)
        grids[nu] = grid
        tds[nu] = kernel_time_domain(grid, cfg.clip_ratio(nu))
    inp = ModelInput(
        probe=symbols,
        probe_nu=cfg.plan.probe,
        phi_nl=phi,
        interferers=interferer_symbols or {},
        td_kernels=tds,
        fd_kernels=grids,
    )
    frame = BlockFrame(n_fft, cfg.overlap or n_fft // 2)
    return inp, frame, time.perf_counter() - t0


def run_model(cfg, inp, frame):
    """Dispatch to the configured model variant."""
    if cfg.model == "reg-td":
        return reg_td(inp)
    if cfg.model == "reglog-td":
        return reglog_td(inp)
    if cfg.model == "reg-fd":
        return reg_fd(inp, frame)
    return reglog_fd(inp, frame)


def transmit_symbols(cfg):
    """Probe plus per-interferer symbol sequences, deterministic per seed."""
    probe = generate_symbols(cfg.m_pol, cfg.n_sym, np.random.default_rng(cfg.seed))
    interferers = {}
    for nu in cfg.plan.interferer_indices:
        rng = np.random.default_rng([cfg.seed, nu])
        interferers[nu] = generate_symbols(cfg.m_pol, cfg.n_sym, rng)
    return probe, interferers


def run_reference(cfg, probe, interferers):
    """Split-step reference run: modulate, mux, propagate, receive."""
    os_factor = cfg.default_oversampling
    chp = cfg.plan.probe_channel
    fields, offsets = [], []
    for nu, ch in enumerate(cfg.plan.channels):
        symbols = probe if nu == cfg.plan.probe else interferers[nu]
        fields.append(modulate(symbols, ch.symbol_rate, ch.rolloff, ch.power,
                               os_factor))
        offsets.append(ch.offset)
    field = wdm_mux(fields, offsets) if len(fields) > 1 else fields[0]
    out = propagate(field, cfg.link, StepPolicy(cfg.phi_max))
    return receiver_frontend(out, cfg.link, chp.symbol_rate, chp.rolloff,
                             chp.power)


def evaluate_point(cfg):
    """
    Full pipeline for one configuration: kernels, model, reference, error.

    Returns
    -------
    PointResult
        With the interior mean-squared error in dB, the probe kernel-energy
        decomposition, the residual received-power offset of the reference
        (signal depletion is deliberately not re-normalized), and runtimes.
    """
    params = dict(
        model=cfg.model,
        rs_gbd=cfg.plan.probe_channel.symbol_rate / 1e9,
        p_dbm=10.0 * np.log10(cfg.plan.probe_channel.power / 1e-3),
        rolloff=cfg.plan.probe_channel.rolloff,
        n_spans=len(cfg.link.spans),
        n_sym=cfg.n_sym,
        n_fft=resolved_n_fft(cfg),
    )
    result = PointResult(config_hash=config_hash(cfg), params=params)
    try:
        probe, interferers = transmit_symbols(cfg)
        inp, frame, t_kernel = build_model_input(cfg, probe, interferers)
        result.t_kernel = t_kernel

        t0 = time.perf_counter()
        y_model = run_model(cfg, inp, frame)
        result.t_model = time.perf_counter() - t0

        t0 = time.perf_counter()
        y_ref = run_reference(cfg, probe, interferers)
        result.t_ssfm = time.perf_counter() - t0

        discard = cfg.edge_discard or max(
            2 * max(k.memory() for k in inp.td_kernels.values()), frame.overlap)
        result.sigma_e2_db = mse(y_ref, y_model, discard)
        p_rx = float((y_ref * np.conj(y_ref)).real.sum(axis=1).mean())
        result.rx_power_offset_db = 10.0 * np.log10(p_rx)
        result.energies = kernel_energies(inp.td_kernels[cfg.plan.probe],
                                          inp.fd_kernels[cfg.plan.probe],
                                          is_probe=True)
    except Exception as exc:                      # per-point failures recorded
        log.exception("sweep point failed: %s", params)
        result.error = f"{type(exc).__name__}: {exc}"
    return result


_SWEEP_KEYS = {
    "power_dbm": "power_dbm",
    "rs_gbd": "symbol_rate_gbd",
    "rolloff": "rolloff",
    "n_spans": "n_spans",
    "model": "model",
    "seed": "seed",
}


def sweep_points(raw_config, grid):
    """Cartesian product of sweep values, as resolved RunConfigs in order."""
    for key in grid:
        if key not in _SWEEP_KEYS:
            raise ValueError(f"unknown sweep parameter {key!r}; supported: "
                             f"{sorted(_SWEEP_KEYS)}")
    keys = list(grid)
    for combo in itertools.product(*(grid[k] for k in keys)):
        overrides = {_SWEEP_KEYS[k]: v for k, v in zip(keys, combo)}
        yield config_from_dict(raw_config, overrides)


def run_sweep(raw_config, grid, max_workers=None):
    """
    Evaluate every grid point; failures are recorded, the run continues.

    Parameters
    ----------
    raw_config : dict
        Parsed base configuration (TOML layout).
    grid : dict
        Sweep table, e.g. ``{"power_dbm": [0, 1.5, 3]}``; the cartesian
        product over all listed parameters is evaluated.
    max_workers : int, optional
        Worker processes; 1 (default) evaluates in-process.

    Returns
    -------
    SweepResult
        Rows in deterministic grid order.
    """
    cfgs = list(sweep_points(raw_config, grid))
    if max_workers is None or max_workers <= 1 or len(cfgs) <= 1:
        rows = [evaluate_point(c) for c in cfgs]
    else:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(evaluate_point, cfgs))
    return SweepResult(rows=rows)


def emit_csv(result, path):
    """
    Write sweep rows as UTF-8 CSV with a versioned, fixed column layout.

    dB quantities carry two decimals; energies keep full precision.
    """
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        header = list(CSV_COLUMNS)
        header[0] = f"config_hash (v{CSV_VERSION})"
        writer.writerow(header)
        for row in result.rows:
            en = row.energies
            writer.writerow([
                row.config_hash,
                row.params.get("model", ""),
                f"{row.params.get('rs_gbd', float('nan')):.6g}",
                f"{row.params.get('p_dbm', float('nan')):.4g}",
                f"{row.params.get('rolloff', float('nan')):.4g}",
                row.params.get("n_spans", ""),
                row.params.get("n_sym", ""),
                row.params.get("n_fft", ""),
                _db(row.sigma_e2_db),
                *(f"{v:.9g}" for v in (
                    (en.td.total, en.td.additive, en.td.multiplicative,
                     en.fd.total, en.fd.additive, en.fd.multiplicative)
                    if en is not None else (float("nan"),) * 6)),
                _db(row.rx_power_offset_db),
                f"{row.t_kernel:.3f}", f"{row.t_model:.3f}",
                f"{row.t_ssfm:.3f}",
                row.error,
            ])


def _db(value):
    return "" if value != value else f"{value:.2f}"
