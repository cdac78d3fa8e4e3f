"""Root-raised-cosine transmit pulses, defined directly in the spectral domain.

The raised-cosine shape is normalized to 1 at dc, so the square-root shape
``g(omega)`` satisfies the Nyquist fold ``sum_m g(omega - 2*pi*m/T)^2 = 1``
for every rolloff.  At rolloff 0 the brick-wall band is taken half-open,
``-pi/T <= omega < pi/T``, mirroring the half-open Nyquist interval of the
discrete-frequency grid; this keeps the fold exact on the edge bin and makes
the rolloff-0 aliased kernel equal 1 on its whole degenerate set.

With launch power ``P`` the transmit spectrum is ``sqrt(P) * g(omega)``; the
pulse energy then comes out as ``P * T``, i.e. power is set purely by pulse
energy while the data symbols keep unit variance.
"""

import numpy as np

# relative slack for deciding that a frequency sits exactly on the band edge
# (grid bins land there up to rounding; physical in-band bins are far away)
_EDGE_TOL = 1e-9


def rc_shape(omega, symbol_period, rolloff):
    """
    Raised-cosine Nyquist spectrum, normalized to ``rc_shape(0) = 1``.

    Parameters
    ----------
    omega : np.array
        Angular frequencies in rad/s.
    symbol_period : scalar
        Symbol period T in seconds.
    rolloff : scalar
        Excess-bandwidth factor in [0, 1].

    Returns
    -------
    np.array
        Values in [0, 1]; zero outside ``|omega| > (1 + rolloff) * pi / T``.
    """
    if not 0.0 <= rolloff <= 1.0:
        raise ValueError(f"rolloff must be in [0, 1], got {rolloff}")
    a_signed = np.asarray(omega, dtype=float) * symbol_period / np.pi
    if rolloff == 0.0:
        on_hi = np.abs(a_signed - 1.0) <= _EDGE_TOL
        on_lo = np.abs(a_signed + 1.0) <= _EDGE_TOL
        inside = (np.abs(a_signed) < 1.0) & ~on_hi
        return np.where(inside | on_lo, 1.0, 0.0)
    a = np.abs(a_signed)
    flat = a <= 1.0 - rolloff
    taper = (a > 1.0 - rolloff) & (a < 1.0 + rolloff)
    out = np.zeros_like(a)
    out[flat] = 1.0
    out[taper] = 0.5 * (1.0 + np.cos(np.pi * (a[taper] - (1.0 - rolloff)) / (2.0 * rolloff)))
    return out


def rrc_shape(omega, symbol_period, rolloff):
    """Square-root raised-cosine spectrum ``g(omega)``, dc value 1."""
    return np.sqrt(rc_shape(omega, symbol_period, rolloff))


def tx_pulse_spectrum(omega, symbol_period, rolloff, power):
    """
    Transmit pulse spectrum ``H_Tx(omega) = sqrt(P) * g(omega)``.

    The implied pulse energy is ``P * T`` so the average launch power of a
    unit-variance symbol sequence equals ``power``.
    """
    return np.sqrt(power) * rrc_shape(omega, symbol_period, rolloff)
