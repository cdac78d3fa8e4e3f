"""Transmission-link description: spans, power/dispersion profiles, lengths.

Two amplification schemes are supported:

* ``"lossless"`` -- ideal distributed amplification; the local gain cancels
  the local loss everywhere, so the net gain/loss profile is identically
  zero no matter what per-span attenuation is configured.
* ``"lumped"`` -- end-of-span amplifiers that exactly compensate the loss of
  the span they terminate (constant-gain, transparent link).

Both satisfy the boundary condition that the normalized power profile equals
one at the link input and output.  Lumped gain is represented as a discrete
reset event at the span boundary rather than a sampled delta function, which
keeps every profile quantity exact.
"""

import math
from dataclasses import dataclass

import numpy as np

LN10_OVER_10 = math.log(10.0) / 10.0


def alpha_from_db_km(alpha_db_km):
    """Convert a power attenuation in dB/km to 1/m (attenuates power)."""
    return alpha_db_km * LN10_OVER_10 / 1e3


def dbm_to_watt(p_dbm):
    """Convert dBm to watts."""
    return 1e-3 * 10.0 ** (p_dbm / 10.0)


@dataclass(frozen=True)
class SpanSpec:
    """One fiber span with constant local properties.

    Parameters
    ----------
    length : float
        Span length in m (> 0).
    alpha : float
        Power attenuation in 1/m (>= 0). Use :func:`alpha_from_db_km`.
    beta2 : float
        Group-velocity dispersion in s^2/m.
    gamma : float
        Nonlinearity coefficient in 1/(W m), power-normalized.
    """

    length: float
    alpha: float
    beta2: float
    gamma: float

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError(f"span length must be > 0, got {self.length}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")


@dataclass(frozen=True)
class LinkSpec:
    """Ordered spans plus amplification scheme and pre-dispersion.

    ``pre_dispersion`` is the accumulated dispersion (s^2) at the link input.
    """

    spans: tuple
    amplification: str = "lumped"
    pre_dispersion: float = 0.0

    def __post_init__(self):
        if len(self.spans) == 0:
            raise ValueError("link needs at least one span")
        if self.amplification not in ("lumped", "lossless"):
            raise ValueError(f"unknown amplification scheme {self.amplification!r}")
        gammas = {s.gamma for s in self.spans}
        if len(gammas) > 1:
            raise ValueError(
                "spans with differing nonlinearity coefficients are not supported; "
                "fold gamma variations into the gain/loss profile instead"
            )
        object.__setattr__(self, "spans", tuple(self.spans))

    @property
    def total_length(self):
        return float(sum(s.length for s in self.spans))

    @property
    def gamma(self):
        return self.spans[0].gamma

    @property
    def span_starts(self):
        """z coordinate of the start of each span, plus the link end."""
        return np.concatenate([[0.0], np.cumsum([s.length for s in self.spans])])

    def net_alpha(self, span):
        """Net attenuation rate of a span under the configured amplification."""
        return 0.0 if self.amplification == "lossless" else span.alpha

    @property
    def average_beta2(self):
        return float(sum(s.beta2 * s.length for s in self.spans) / self.total_length)


def homogeneous_link(n_spans, span_length, alpha, beta2, gamma,
                     amplification="lumped", pre_dispersion=0.0):
    """Build a link of ``n_spans`` identical spans."""
    span = SpanSpec(span_length, alpha, beta2, gamma)
    return LinkSpec((span,) * n_spans, amplification, pre_dispersion)


def _span_index_and_offset(link, z):
    """Span index and in-span offset for positions z; z at a boundary maps
    to offset 0 of the following span (post-amplifier convention)."""
    z = np.asarray(z, dtype=float)
    starts = link.span_starts
    total = starts[-1]
    if np.any(z < -1e-9) or np.any(z > total * (1 + 1e-12) + 1e-9):
        raise ValueError("z outside [0, total link length]")
    idx = np.clip(np.searchsorted(starts, z, side="right") - 1, 0, len(link.spans) - 1)
    off = z - starts[idx]
    # z == total belongs "after" the final amplifier
    at_end = np.isclose(z, total)
    return idx, np.where(at_end, 0.0, off), at_end


def accumulated_dispersion(link, z):
    """
    Accumulated dispersion B(z) in s^2, piecewise linear over the spans.

    Parameters
    ----------
    link : LinkSpec
    z : scalar or np.array
        Position(s) in m, ``0 <= z <= total length``.
    """
    z = np.asarray(z, dtype=float)
    starts = link.span_starts
    if np.any(z < -1e-9) or np.any(z > starts[-1] * (1 + 1e-12) + 1e-9):
        raise ValueError("z outside [0, total link length]")
    beta2 = np.array([s.beta2 for s in link.spans])
    lengths = np.array([s.length for s in link.spans])
    cum = np.concatenate([[0.0], np.cumsum(beta2 * lengths)])
    idx = np.clip(np.searchsorted(starts, z, side="right") - 1, 0, len(link.spans) - 1)
    out = link.pre_dispersion + cum[idx] + beta2[idx] * (z - starts[idx])
    return out if out.ndim else float(out)


def log_gain_profile(link, z):
    """Logarithmic net gain/loss profile G(z) = ln(power_profile(z))."""
    idx, off, at_end = _span_index_and_offset(link, z)
    alphas = np.array([link.net_alpha(s) for s in link.spans])
    out = np.where(at_end, 0.0, -alphas[idx] * off)
    return out if out.ndim else float(out)


def power_profile(link, z):
    """
    Normalized power profile, 1 at the link input and output.

    For the lumped scheme the profile decays as ``exp(-alpha * dz)`` inside a
    span and resets to 1 at each amplifier; positions exactly on a boundary
    report the post-amplifier value.
    """
    return np.exp(log_gain_profile(link, z))


def effective_length(link):
    """
    Effective (power-weighted) length of the whole link in m, closed form.

    Each span contributes ``(1 - exp(-alpha*L)) / alpha`` (or ``L`` when the
    net attenuation vanishes).
    """
    total = 0.0
    for span in link.spans:
        a = link.net_alpha(span)
        if a * span.length < 1e-12:
            total += span.length
        else:
            total += (1.0 - math.exp(-a * span.length)) / a
    return total


def linear_transfer(link, z, omega):
    """
    Linear channel transfer function exp((G(z) - j omega^2 B(z)) / 2).

    Parameters
    ----------
    link : LinkSpec
    z : scalar
        Position in m.
    omega : scalar or np.array
        Angular frequency in rad/s.

    Returns
    -------
    complex np.array
        Joint chromatic-dispersion / gain response; unit magnitude at the
        link output where G vanishes.
    """
    g = log_gain_profile(link, z)
    b = accumulated_dispersion(link, z)
    omega = np.asarray(omega, dtype=float)
    return np.exp((g - 1j * omega**2 * b) / 2.0)


@dataclass(frozen=True)
class ChannelSpec:
    """One wavelength channel of the WDM plan.

    ``offset`` is the angular carrier offset from the probe in rad/s.
    """

    symbol_rate: float
    rolloff: float
    power: float
    offset: float = 0.0

    def __post_init__(self):
        if not self.symbol_rate > 0:
            raise ValueError("symbol_rate must be > 0")
        if not 0.0 <= self.rolloff <= 1.0:
            raise ValueError("rolloff must be in [0, 1]")
        if not self.power > 0:
            raise ValueError("power must be > 0")


@dataclass(frozen=True)
class ChannelPlan:
    """WDM channel plan; all channels share the probe's symbol rate."""

    channels: tuple
    probe: int = 0

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        if not 0 <= self.probe < len(self.channels):
            raise ValueError("probe index out of range")
        rates = {c.symbol_rate for c in self.channels}
        if len(rates) > 1:
            raise ValueError("all channels must share the same symbol rate")
        if abs(self.channels[self.probe].offset) > 0:
            raise ValueError("probe channel must sit at zero frequency offset")

    @property
    def probe_channel(self):
        return self.channels[self.probe]

    @property
    def symbol_period(self):
        return 1.0 / self.channels[self.probe].symbol_rate

    @property
    def interferer_indices(self):
        return [i for i in range(len(self.channels)) if i != self.probe]


@dataclass(frozen=True)
class CharacteristicQuantities:
    """Length scales and strengths that characterize the nonlinear response."""

    effective_length: float
    dispersion_length: float
    map_strength: float                  # effective_length / dispersion_length
    walkoff_length: tuple                # per channel; None for the probe
    map_strength_nu: tuple               # per channel; probe entry = map_strength
    nonlinear_length: tuple              # per channel, 1 / (gamma * P)
    phi_nl: tuple                        # per channel, (8/9) Leff / L_NL


def characteristic_quantities(link, plan):
    """
    Compute the per-link and per-channel characteristic quantities.

    Parameters
    ----------
    link : LinkSpec
    plan : ChannelPlan

    Returns
    -------
    CharacteristicQuantities
        Uses the path-average dispersion coefficient; the walk-off length of
        the probe itself is reported as None (no walk-off at zero offset).
    """
    rs = plan.probe_channel.symbol_rate
    leff = effective_length(link)
    b2 = link.average_beta2
    l_d = 1.0 / (2.0 * math.pi * abs(b2) * rs**2)
    s_t = leff / l_d
    l_wo, s_nu, l_nl, phi = [], [], [], []
    for i, ch in enumerate(plan.channels):
        lnl = 1.0 / (link.gamma * ch.power)
        l_nl.append(lnl)
        phi.append((8.0 / 9.0) * leff / lnl)
        if i == plan.probe or ch.offset == 0.0:
            l_wo.append(None)
            s_nu.append(s_t)
        else:
            lw = 1.0 / (abs(ch.offset * b2) * rs)
            l_wo.append(lw)
            s_nu.append(leff / lw)
    return CharacteristicQuantities(
        effective_length=leff,
        dispersion_length=l_d,
        map_strength=s_t,
        walkoff_length=tuple(l_wo),
        map_strength_nu=tuple(s_nu),
        nonlinear_length=tuple(l_nl),
        phi_nl=tuple(phi),
    )
