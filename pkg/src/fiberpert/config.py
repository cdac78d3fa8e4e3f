"""Run configuration: TOML config file parsing, defaults, and hashing.

A config file carries the link, the WDM channel plan, model and simulator
settings, and an optional sweep grid::

    [link]
    n_spans = 1
    span_km = 21.71
    alpha_db_km = 0.0
    beta2_ps2_km = -21.0
    gamma_w_km = 1.1
    amplification = "lossless"      # or "lumped"
    pre_dispersion_ps2 = 0.0

    [channels.0]                    # probe: offset 0
    symbol_rate_gbd = 64.0
    rolloff = 0.2
    power_dbm = 0.0

    [channels.1]                    # optional interferers
    offset_ghz = 76.8
    power_dbm = 0.0

    [model]
    type = "reglog-td"              # reg-td | reg-fd | reglog-td | reglog-fd
    n_sym = 8192
    seed = 42
    clip_db = -60.0

    [ssfm]
    phi_max_rad = 3.5e-4

    [sweep]
    power_dbm = [0.0, 1.5, 3.0]

Channel frequency offsets are snapped to the simulation frequency grid
(multiples of ``symbol_rate / n_sym``) so the split-step reference sees a
periodic waveform; the models use the snapped values too.
"""

import hashlib
import math
import sys
from dataclasses import dataclass, replace

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .link import (ChannelPlan, ChannelSpec, LinkSpec, SpanSpec,
                   alpha_from_db_km, dbm_to_watt)

MODEL_NAMES = ("reg-td", "reg-fd", "reglog-td", "reglog-fd")


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration of one model-vs-reference run."""

    link: LinkSpec
    plan: ChannelPlan
    m_pol: int = 64
    n_sym: int = 8192
    seed: int = 42
    model: str = "reglog-td"
    n_fft: int = 0               # 0 -> derived from the map-strength rule
    overlap: int = 0             # 0 -> n_fft // 2
    clip_db: float = -60.0
    clip_db_xci: float = None
    kernel_oversample: int = 1
    phi_max: float = 3.5e-4
    oversampling: int = 0        # 0 -> 8 single-channel, 16 multi-channel
    edge_discard: int = 0        # 0 -> max(2*kernel memory, overlap)
    cache_dir: str = ""

    def __post_init__(self):
        if self.model not in MODEL_NAMES:
            raise ValueError(f"unknown model {self.model!r}; "
                             f"choose from {MODEL_NAMES}")
        if self.n_sym < 2 or self.n_sym & (self.n_sym - 1):
            raise ValueError("n_sym must be a power of two")
        if self.n_fft and self.n_sym < self.n_fft:
            raise ValueError("n_sym must be at least n_fft")
        if self.kernel_oversample < 1:
            raise ValueError("kernel_oversample must be >= 1")

    @property
    def default_oversampling(self):
        if self.oversampling:
            return self.oversampling
        return 8 if len(self.plan.channels) == 1 else 16

    def clip_ratio(self, nu):
        db = self.clip_db
        if nu != self.plan.probe and self.clip_db_xci is not None:
            db = self.clip_db_xci
        return 10.0 ** (db / 10.0)


def _snap_offsets(plan, n_sym):
    """Snap channel offsets to the periodic simulation grid."""
    rs = plan.probe_channel.symbol_rate
    bin_hz = rs / n_sym
    chans = []
    for ch in plan.channels:
        off_hz = ch.offset / (2.0 * math.pi)
        snapped = round(off_hz / bin_hz) * bin_hz
        chans.append(replace(ch, offset=2.0 * math.pi * snapped))
    return ChannelPlan(tuple(chans), plan.probe)


def load_config(path, overrides=None):
    """
    Load a TOML config file into a RunConfig.

    Parameters
    ----------
    path : str
    overrides : dict, optional
        Flat key/value pairs that win over the file: ``model``, ``seed``,
        ``n_sym``, ``n_fft``, ``overlap``, ``power_dbm`` (probe power),
        ``cache_dir``, ``clip_db``, ``phi_max``.

    Returns
    -------
    RunConfig
    """
    with open(path, "rb") as f:
        raw = tomllib.load(f)
    return config_from_dict(raw, overrides)


def config_from_dict(raw, overrides=None):
    """Build a RunConfig from nested dicts shaped like the TOML layout."""
    overrides = dict(overrides or {})
    ln = raw.get("link", {})
    n_spans = int(ln.get("n_spans", 1))
    span = SpanSpec(
        length=float(ln.get("span_km", 21.71)) * 1e3,
        alpha=alpha_from_db_km(float(ln.get("alpha_db_km", 0.0))),
        beta2=float(ln.get("beta2_ps2_km", -21.0)) * 1e-27,
        gamma=float(ln.get("gamma_w_km", 1.1)) * 1e-3,
    )
    link = LinkSpec(
        spans=(span,) * n_spans,
        amplification=str(ln.get("amplification", "lossless")),
        pre_dispersion=float(ln.get("pre_dispersion_ps2", 0.0)) * 1e-24,
    )

    chan_cfg = raw.get("channels", {"0": {}})
    indices = sorted(chan_cfg, key=int)
    rs = None
    for key in indices:
        if "symbol_rate_gbd" in chan_cfg[key]:
            rs = float(chan_cfg[key]["symbol_rate_gbd"]) * 1e9
            break
    rs = rs if rs is not None else 64e9
    if "symbol_rate_gbd" in overrides:
        rs = float(overrides.pop("symbol_rate_gbd")) * 1e9
    channels = []
    probe = None
    for pos, key in enumerate(indices):
        c = chan_cfg[key]
        off = 2.0 * math.pi * float(c.get("offset_ghz", 0.0)) * 1e9
        if off == 0.0:
            if probe is not None:
                raise ValueError("exactly one channel must sit at offset 0")
            probe = pos
        channels.append(ChannelSpec(
            symbol_rate=rs,
            rolloff=float(c.get("rolloff", 0.2)),
            power=dbm_to_watt(float(c.get("power_dbm", 0.0))),
            offset=off,
        ))
    if probe is None:
        raise ValueError("no probe channel (offset 0) in the plan")
    if "power_dbm" in overrides:
        channels[probe] = replace(channels[probe],
                                  power=dbm_to_watt(float(overrides.pop("power_dbm"))))
    if "rolloff" in overrides:
        r = float(overrides.pop("rolloff"))
        channels = [replace(c, rolloff=r) for c in channels]
    plan = ChannelPlan(tuple(channels), probe)

    md = raw.get("model", {})
    sf = raw.get("ssfm", {})
    kwargs = dict(
        m_pol=int(md.get("m_pol", 64)),
        n_sym=int(md.get("n_sym", 8192)),
        seed=int(md.get("seed", 42)),
        model=str(md.get("type", "reglog-td")),
        n_fft=int(md.get("n_fft", 0)),
        overlap=int(md.get("overlap", 0)),
        clip_db=float(md.get("clip_db", -60.0)),
        clip_db_xci=(float(md["clip_db_xci"]) if "clip_db_xci" in md else None),
        kernel_oversample=int(md.get("kernel_oversample", 1)),
        phi_max=float(sf.get("phi_max_rad", 3.5e-4)),
        oversampling=int(sf.get("oversampling", 0)),
        edge_discard=int(md.get("edge_discard", 0)),
        cache_dir=str(md.get("cache_dir", "")),
    )
    for key in ("model", "seed", "n_sym", "n_fft", "overlap", "clip_db",
                "phi_max", "cache_dir"):
        if key in overrides:
            val = overrides.pop(key)
            kwargs[key] = type(kwargs[key])(val) if kwargs[key] is not None else val
    if "n_spans" in overrides:
        n = int(overrides.pop("n_spans"))
        link = LinkSpec((span,) * n, link.amplification, link.pre_dispersion)
    if overrides:
        raise ValueError(f"unknown overrides: {sorted(overrides)}")
    plan = _snap_offsets(plan, kwargs["n_sym"])
    return RunConfig(link=link, plan=plan, **kwargs)


def sweep_grid(raw):
    """Extract the sweep table (key -> list of values) from a parsed config."""
    grid = raw.get("sweep", {})
    return {k: list(v) for k, v in grid.items()}


def config_hash(cfg):
    """Short stable hash of a resolved configuration (for CSV joins)."""
    parts = [
        cfg.link.amplification, repr(cfg.link.pre_dispersion),
        ";".join(f"{s.length!r},{s.alpha!r},{s.beta2!r},{s.gamma!r}"
                 for s in cfg.link.spans),
        ";".join(f"{c.symbol_rate!r},{c.rolloff!r},{c.power!r},{c.offset!r}"
                 for c in cfg.plan.channels),
        str(cfg.plan.probe), str(cfg.m_pol), str(cfg.n_sym), str(cfg.seed),
        cfg.model, str(cfg.n_fft), str(cfg.overlap), repr(cfg.clip_db),
        repr(cfg.clip_db_xci), str(cfg.kernel_oversample), repr(cfg.phi_max),
        str(cfg.oversampling), str(cfg.edge_discard),
    ]
    return hashlib.sha256("|".join(parts).encode()).hexdigest()[:16]
