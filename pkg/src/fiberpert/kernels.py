"""End-to-end nonlinear kernels: phase-matching transfer function, unaliased
and 1/T-periodic (aliased) frequency-domain kernels, sparse time-domain
kernels, degenerate-set classification, and kernel energies.

The kernels are independent of the launch powers: the pulse-spectrum
normalization cancels them exactly, so a power sweep can reuse cached
kernels.  Power enters the channel models only through the per-channel
nonlinear phase.

Grid convention: all three frequency axes use FFT bin order, i.e. bin
``mu`` maps to ``omega = 2*pi*mu'/(n_fft*T)`` with ``mu' = mu`` for
``mu < n_fft/2`` and ``mu' = mu - n_fft`` otherwise (Nyquist-folded).
"""

import hashlib
import itertools
import logging
import math
import struct
from dataclasses import dataclass

import numpy as np

from .link import effective_length, accumulated_dispersion, characteristic_quantities
from .pulses import rrc_shape

log = logging.getLogger(__name__)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)

# keep per-term scratch cubes below ~2^22 elements when folding large grids
_CHUNK_ELEMS = 1 << 22


def _span_profile(link):
    """Per-span (start dispersion, net alpha, beta2, length) arrays."""
    starts = link.span_starts[:-1]
    b = np.array([accumulated_dispersion(link, z) for z in starts])
    a = np.array([link.net_alpha(s) for s in link.spans])
    b2 = np.array([s.beta2 for s in link.spans])
    ln = np.array([s.length for s in link.spans])
    return b, a, b2, ln


def _phi1(t):
    """(exp(t) - 1) / t with a small-|t| series to avoid cancellation."""
    t = np.atleast_1d(np.asarray(t, dtype=complex))
    out = np.empty_like(t)
    small = np.abs(t) < 1e-4
    ts = t[small]
    out[small] = 1.0 + ts / 2.0 + ts * ts / 6.0 + ts * ts * ts / 24.0
    tb = t[~small]
    out[~small] = (np.exp(tb) - 1.0) / tb
    return out


def nonlinear_transfer(link, omega_product):
    """
    Phase-matching transfer function of the link, exact per-span closed form.

    The function depends on the two difference frequencies only through
    their product, and is normalized to 1 at zero product.

    Parameters
    ----------
    link : LinkSpec
    omega_product : scalar or np.array
        Product of the two difference frequencies, (rad/s)^2.

    Returns
    -------
    complex np.array
        Dimensionless transfer value(s), magnitude <= 1.
    """
    om = np.asarray(omega_product, dtype=float)
    omf = np.atleast_1d(om)
    b_start, alpha, beta2, lengths = _span_profile(link)
    leff = effective_length(link)
    acc = np.zeros(omf.shape, dtype=complex)
    for b0, a, b2, ln in zip(b_start, alpha, beta2, lengths):
        c = 1j * omf * b2 - a
        acc += np.exp(1j * omf * b0) * ln * _phi1(c * ln)
    acc /= leff
    return acc.reshape(om.shape) if om.ndim else complex(acc[0])


def nonlinear_transfer_closed_form(link, omega_product):
    """
    Closed-form phase-matching transfer function for homogeneous links.

    Evaluates the single-span primitive once and sums the per-span phase
    factors as a geometric series (Dirichlet form, numerically stable near
    coherent addition).  Heterogeneous links are rejected; use
    :func:`nonlinear_transfer` or :func:`nonlinear_transfer_quadrature`.

    Parameters
    ----------
    link : LinkSpec
    omega_product : scalar or np.array
        Product of the two difference frequencies, (rad/s)^2.

    Returns
    -------
    complex np.array
    """
    spans = set((s.length, s.alpha, s.beta2) for s in link.spans)
    if len(spans) > 1:
        raise ValueError("closed form requires identical spans")
    span = link.spans[0]
    n_sp = len(link.spans)
    a = link.net_alpha(span)
    om = np.asarray(omega_product, dtype=float)
    omf = np.atleast_1d(om)
    leff = effective_length(link)
    c = 1j * omf * span.beta2 - a
    prim = span.length * _phi1(c * span.length)
    half = 0.5 * omf * span.beta2 * span.length
    den = np.sin(half)
    degenerate = np.abs(den) < 1e-14
    ratio = np.sin(n_sp * half) / np.where(degenerate, 1.0, den)
    geo = np.where(degenerate, float(n_sp),
                   ratio * np.exp(1j * half * (n_sp - 1)))
    out = np.exp(1j * omf * link.pre_dispersion) * prim * geo / leff
    return out.reshape(om.shape) if om.ndim else complex(out[0])


def nonlinear_transfer_quadrature(link, upsilon1, upsilon2, rtol=1e-10,
                                  max_refine=14):
    """
    Phase-matching transfer function by adaptive Gauss-Legendre quadrature.

    Serves as the independent numerical route against the closed forms.  Each
    span is integrated with a composite 16-point rule whose panel count
    starts at the oscillation rate of the integrand and is doubled until two
    successive refinements agree to ``rtol``.

    Parameters
    ----------
    link : LinkSpec
    upsilon1, upsilon2 : scalar
        Difference frequencies in rad/s; only their product matters.
    rtol : scalar
        Relative convergence target for the normalized transfer value.
    max_refine : int
        Maximum number of panel doublings before giving up.

    Returns
    -------
    complex
        Dimensionless transfer value.

    Raises
    ------
    RuntimeError
        If the refinement does not converge; the result is never silently
        truncated.
    """
    om = float(upsilon1) * float(upsilon2)
    b_start, alphas, beta2s, lengths = _span_profile(link)
    leff = effective_length(link)
    total = 0.0 + 0.0j
    for b0, a, b2, ln in zip(b_start, alphas, beta2s, lengths):
        def integrand(x):
            return np.exp(-a * x + 1j * om * (b0 + b2 * x))

        n_panels = max(1, int(math.ceil(abs(om * b2) * ln / (2.0 * math.pi))))
        prev = _composite_gl(integrand, ln, n_panels)
        converged = False
        for _ in range(max_refine):
            n_panels *= 2
            cur = _composite_gl(integrand, ln, n_panels)
            if abs(cur - prev) <= rtol * max(abs(cur), 1e-3 * leff):
                converged = True
                prev = cur
                break
            prev = cur
        if not converged:
            raise RuntimeError(
                f"span quadrature did not reach rtol={rtol} after "
                f"{max_refine} refinements (product={om:.3e})")
        total += prev
    return total / leff


def _composite_gl(f, length, n_panels):
    edges = np.linspace(0.0, length, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    x = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    return complex((half[:, None] * _GL_WEIGHTS[None, :] * f(x)).sum())


def e2e_kernel_unaliased(link, plan, nu, omega1, omega2, omega3):
    """
    Unaliased end-to-end kernel of channel ``nu`` onto the probe.

    Combines the four pulse-spectrum factors (two from the interferer's
    transmit pulse, two from the probe's transmit and matched filter) with
    the phase-matching transfer function at the offset-shifted difference
    frequencies.  The value carries the ``T^3`` scale that the aliasing
    operator later removes; launch powers cancel.

    Parameters
    ----------
    link : LinkSpec
    plan : ChannelPlan
    nu : int
        Channel index within the plan (``plan.probe`` for the self kernel).
    omega1, omega2, omega3 : np.array (broadcastable)
        Angular frequencies in rad/s.

    Returns
    -------
    complex np.array
        Zero wherever any pulse factor has no spectral support.
    """
    t_sym = plan.symbol_period
    ch = plan.channels[nu]
    chp = plan.probe_channel
    w1b, w2b, w3b = np.broadcast_arrays(np.asarray(omega1, dtype=float),
                                        np.asarray(omega2, dtype=float),
                                        np.asarray(omega3, dtype=float))
    shape = w1b.shape
    w1, w2, w3 = (np.atleast_1d(w) for w in (w1b, w2b, w3b))
    amp = (rrc_shape(w1, t_sym, ch.rolloff)
           * rrc_shape(w2, t_sym, ch.rolloff)
           * rrc_shape(w3, t_sym, chp.rolloff)
           * rrc_shape(w1 - w2 + w3, t_sym, chp.rolloff))
    out = np.zeros(amp.shape, dtype=complex)
    nz = amp != 0.0
    if np.any(nz):
        prod = (w2[nz] - w1[nz]) * (w2[nz] - w3[nz] - ch.offset)
        out[nz] = amp[nz] * nonlinear_transfer(link, prod)
    out *= t_sym**3
    return out.reshape(shape) if len(shape) else complex(out[0])


@dataclass
class FreqKernelGrid:
    """Aliased 1/T-periodic end-to-end kernel sampled on an FFT-ordered grid.

    ``values[mu1, mu2, mu3]`` is dimensionless; for the probe kernel the
    all-zero bin equals 1 exactly.
    """

    nu: int
    n_fft: int
    symbol_period: float
    values: np.ndarray

    def subsample(self, factor):
        """Exact decimation onto a coarser grid (every ``factor``-th bin)."""
        if self.n_fft % factor:
            raise ValueError("subsample factor must divide n_fft")
        return FreqKernelGrid(self.nu, self.n_fft // factor, self.symbol_period,
                              self.values[::factor, ::factor, ::factor].copy())


@dataclass
class TimeKernelSparse:
    """Clipped time-domain kernel: centered index triples and coefficients.

    Every stored entry satisfies ``|h[kappa]/h[0]|^2 > clip_level``.
    """

    nu: int
    n_fft: int
    clip_level: float
    kappa: np.ndarray         # (M, 3) int32, centered in [-n_fft/2, n_fft/2)
    values: np.ndarray        # (M,) complex
    center_value: complex

    def memory(self):
        """Largest absolute symbol index of any stored entry."""
        return int(np.max(np.abs(self.kappa))) if len(self.kappa) else 0

    def dense(self):
        """Dense cube indexed ``[kappa + n_fft//2]`` on each axis."""
        n = self.n_fft
        cube = np.zeros((n, n, n), dtype=complex)
        idx = self.kappa + n // 2
        cube[idx[:, 0], idx[:, 1], idx[:, 2]] = self.values
        return cube


def alias_kernel(link, plan, nu, n_fft):
    """
    Fold the unaliased kernel into the Nyquist cube on an ``n_fft^3`` grid.

    The periodic continuation sums shifted kernel copies over
    ``m_i in {-1, 0, 1}``; terms with ``|m_i| >= 2`` vanish identically
    because every kernel factor carries one pulse spectrum whose support is
    at most ``2*pi/T`` wide for rolloff <= 1 (asserted here).

    Parameters
    ----------
    link : LinkSpec
    plan : ChannelPlan
    nu : int
        Channel index; ``plan.probe`` builds the self-interference kernel.
    n_fft : int
        Grid size per dimension (>= 2).

    Returns
    -------
    FreqKernelGrid
    """
    if n_fft < 2:
        raise ValueError("n_fft must be >= 2")
    t_sym = plan.symbol_period
    ch = plan.channels[nu]
    chp = plan.probe_channel
    assert max(ch.rolloff, chp.rolloff) <= 1.0
    mu = (np.fft.fftfreq(n_fft) * n_fft).astype(int)
    omega = 2.0 * np.pi * mu / (n_fft * t_sym)
    shift = 2.0 * np.pi / t_sym
    vals = np.zeros((n_fft, n_fft, n_fft), dtype=complex)
    for m1, m2, m3 in itertools.product((-1, 0, 1), repeat=3):
        w1 = omega - m1 * shift
        w2 = omega - m2 * shift
        w3 = omega - m3 * shift
        f1 = rrc_shape(w1, t_sym, ch.rolloff)
        f2 = rrc_shape(w2, t_sym, ch.rolloff)
        f3 = rrc_shape(w3, t_sym, chp.rolloff)
        i1 = np.flatnonzero(f1)
        i2 = np.flatnonzero(f2)
        i3 = np.flatnonzero(f3)
        if not (len(i1) and len(i2) and len(i3)):
            continue
        chunk = max(1, _CHUNK_ELEMS // max(1, len(i2) * len(i3)))
        for c0 in range(0, len(i1), chunk):
            i1c = i1[c0:c0 + chunk]
            w1c = w1[i1c][:, None, None]
            w2c = w2[i2][None, :, None]
            w3c = w3[i3][None, None, :]
            amp = (f1[i1c][:, None, None] * f2[i2][None, :, None]
                   * f3[i3][None, None, :]
                   * rrc_shape(w1c - w2c + w3c, t_sym, chp.rolloff))
            nz = amp != 0.0
            if not np.any(nz):
                continue
            prod = ((w2c - w1c) * (w2c - w3c - ch.offset))
            prod = np.broadcast_to(prod, amp.shape)[nz]
            term = np.zeros(amp.shape, dtype=complex)
            term[nz] = amp[nz] * nonlinear_transfer(link, prod)
            vals[np.ix_(i1c, i2, i3)] += term
    return FreqKernelGrid(nu=nu, n_fft=n_fft, symbol_period=t_sym, values=vals)


def kernel_time_domain(grid, clip_level):
    """
    Sparse time-domain kernel from the aliased grid by 3-D inverse DFT.

    The returned coefficients are the ones that weight the symbol triple
    ``a[k+kappa_1] a^H[k+kappa_2] a[k+kappa_3]`` in the time-domain models.
    Making that form numerically identical to the frequency-domain block
    algorithm requires the inverse transform to run with opposite sign on
    the first and third (ket) axes; only the conjugated middle axis keeps
    the plain inverse-DFT sign.  Equivalently, the plain inverse transform
    is index-reversed along axes 1 and 3.  All kernel symmetries (real
    two-pulse entries, 1<->3 exchange, negation) hold for this convention.

    Parameters
    ----------
    grid : FreqKernelGrid
    clip_level : scalar
        Power ratio; entries with ``|h[kappa]/h[0]|^2 <= clip_level`` are
        dropped.  Use 0 to keep everything that is not exactly zero.

    Returns
    -------
    TimeKernelSparse
        Indices are recentered to ``[-n_fft/2, n_fft/2)`` per dimension;
        entries are sorted lexicographically in ``kappa``.
    """
    n = grid.n_fft
    h = np.fft.ifftn(grid.values)
    rev = (-np.arange(n)) % n
    h = h[np.ix_(rev, np.arange(n), rev)]
    h0 = complex(h[0, 0, 0])
    keep = np.abs(h) ** 2 > clip_level * abs(h0) ** 2
    idx = np.nonzero(keep)
    centered = (np.fft.fftfreq(n) * n).astype(np.int32)
    kappa = np.stack([centered[idx[0]], centered[idx[1]], centered[idx[2]]], axis=1)
    values = h[keep]
    order = np.lexsort((kappa[:, 2], kappa[:, 1], kappa[:, 0]))
    return TimeKernelSparse(nu=grid.nu, n_fft=n, clip_level=float(clip_level),
                            kappa=kappa[order], values=values[order],
                            center_value=h0)


def classify_sets_td(kernel, is_probe):
    """
    Partition the stored time-domain entries into additive/multiplicative sets.

    For the self kernel the multiplicative set collects both degenerate index
    patterns (``kappa_1 = 0`` or ``kappa_3 = 0`` with the other two nonzero)
    plus the center tap; cross kernels only have the ``kappa_3 = 0``
    degeneracy.

    Parameters
    ----------
    kernel : TimeKernelSparse
    is_probe : bool

    Returns
    -------
    (additive, multiplicative) : pair of boolean np.array over the entries
    """
    k1, k2, k3 = kernel.kappa[:, 0], kernel.kappa[:, 1], kernel.kappa[:, 2]
    zero = (k1 == 0) & (k2 == 0) & (k3 == 0)
    mult = ((k3 == 0) & (k2 != 0) & (k1 != 0)) | zero
    if is_probe:
        mult |= (k1 == 0) & (k2 != 0) & (k3 != 0)
    return ~mult, mult


def classify_sets_fd(n_fft, is_probe):
    """
    Degenerate-set partition of the discrete frequency cube.

    Self-interference excludes both ``mu2 = mu1`` and ``mu2 = mu3``;
    cross-interference only ``mu2 = mu1``.  Index equality is exact, no
    tolerance band.

    Returns
    -------
    (additive, multiplicative) : pair of boolean (n, n, n) arrays, FFT order
    """
    mu = np.arange(n_fft)
    eq12 = (mu[:, None, None] == mu[None, :, None])
    mult = np.broadcast_to(eq12, (n_fft, n_fft, n_fft)).copy()
    if is_probe:
        eq23 = (mu[None, :, None] == mu[None, None, :])
        mult |= np.broadcast_to(eq23, (n_fft, n_fft, n_fft))
    return ~mult, mult


@dataclass(frozen=True)
class KernelEnergyView:
    total: float
    additive: float
    multiplicative: float


@dataclass(frozen=True)
class KernelEnergies:
    """Kernel coefficient energies in the time- and frequency-domain views."""

    td: KernelEnergyView
    fd: KernelEnergyView


def kernel_energies(td_kernel, fd_grid, is_probe):
    """
    Energies of the kernel coefficients, split over the degenerate sets.

    The time-domain sums run over the stored (clipped) entries; the
    frequency-domain sums run over the full grid with the ``1/n_fft^3``
    normalization, so at zero clip the totals agree by Parseval.

    Parameters
    ----------
    td_kernel : TimeKernelSparse
    fd_grid : FreqKernelGrid
    is_probe : bool

    Returns
    -------
    KernelEnergies
    """
    if td_kernel.n_fft != fd_grid.n_fft:
        raise ValueError("time- and frequency-domain views must share n_fft")
    p_td = np.abs(td_kernel.values) ** 2
    add_td, mult_td = classify_sets_td(td_kernel, is_probe)
    td = KernelEnergyView(total=float(p_td.sum()),
                          additive=float(p_td[add_td].sum()),
                          multiplicative=float(p_td[mult_td].sum()))
    n3 = fd_grid.n_fft ** 3
    p_fd = np.abs(fd_grid.values) ** 2
    add_fd, mult_fd = classify_sets_fd(fd_grid.n_fft, is_probe)
    fd = KernelEnergyView(total=float(p_fd.sum() / n3),
                          additive=float(p_fd[add_fd].sum() / n3),
                          multiplicative=float(p_fd[mult_fd].sum() / n3))
    return KernelEnergies(td=td, fd=fd)


def default_n_fft(link, plan, floor=64):
    """
    Default kernel/processing grid size from the largest map strength.

    Rounds the largest per-channel map strength up to the next power of two
    and adds two octaves of headroom, with a floor of 64.
    """
    cq = characteristic_quantities(link, plan)
    s_max = max(cq.map_strength_nu)
    expo = max(1, int(math.ceil(math.log2(max(s_max, 1e-12)))) + 2)
    return max(2 ** expo, floor)


# --------------------------------------------------------------------------
# binary kernel cache
# --------------------------------------------------------------------------

_GRID_MAGIC = b"FKRN"
_SPARSE_MAGIC = b"TKRN"
_CACHE_VERSION = 1
_SPARSE_RECORD = np.dtype([("kappa", "<i4", (3,)), ("re", "<f8"), ("im", "<f8")])


def kernel_hash(link, plan, nu, n_fft):
    """
    32-byte digest identifying a kernel build.

    Launch powers and the nonlinearity coefficient are deliberately left out:
    neither enters the kernel, so cache hits survive power sweeps.
    """
    parts = [f"v{_CACHE_VERSION}", f"nu={nu}", f"nfft={n_fft}",
             f"amp={link.amplification}", f"b0={link.pre_dispersion!r}",
             f"probe={plan.probe}"]
    for s in link.spans:
        parts.append(f"span={s.length!r},{s.alpha!r},{s.beta2!r}")
    for i, c in enumerate(plan.channels):
        parts.append(f"ch{i}={c.symbol_rate!r},{c.rolloff!r},{c.offset!r}")
    return hashlib.sha256(";".join(parts).encode()).digest()


def write_kernel_grid(path, grid, link_hash):
    """Write a frequency-domain kernel grid to the binary cache format."""
    header = struct.pack("<4sIiId", _GRID_MAGIC, _CACHE_VERSION, grid.nu,
                         grid.n_fft, grid.symbol_period) + bytes(link_hash)
    with open(path, "wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(grid.values, dtype="<c16").tobytes())


def read_kernel_grid(path):
    """Read a cached grid; returns ``(FreqKernelGrid, link_hash)``."""
    with open(path, "rb") as f:
        head = f.read(struct.calcsize("<4sIiId"))
        magic, version, nu, n_fft, t_sym = struct.unpack("<4sIiId", head)
        if magic != _GRID_MAGIC:
            raise ValueError(f"{path}: not a kernel grid cache file")
        if version != _CACHE_VERSION:
            raise ValueError(f"{path}: unsupported cache version {version}")
        link_hash = f.read(32)
        raw = f.read(16 * n_fft**3)
    values = np.frombuffer(raw, dtype="<c16").astype(complex).reshape(
        (n_fft, n_fft, n_fft))
    return FreqKernelGrid(nu=nu, n_fft=n_fft, symbol_period=t_sym,
                          values=values), link_hash


def write_kernel_sparse(path, kernel, link_hash):
    """Write a clipped time-domain kernel as packed index/value records."""
    header = struct.pack("<4sIiId", _SPARSE_MAGIC, _CACHE_VERSION, kernel.nu,
                         kernel.n_fft, kernel.clip_level) + bytes(link_hash)
    rec = np.empty(len(kernel.values), dtype=_SPARSE_RECORD)
    rec["kappa"] = kernel.kappa
    rec["re"] = kernel.values.real
    rec["im"] = kernel.values.imag
    with open(path, "wb") as f:
        f.write(header)
        f.write(struct.pack("<Q", len(rec)))
        f.write(rec.tobytes())


def read_kernel_sparse(path):
    """Read a cached sparse kernel; returns ``(TimeKernelSparse, link_hash)``."""
    with open(path, "rb") as f:
        head = f.read(struct.calcsize("<4sIiId"))
        magic, version, nu, n_fft, clip = struct.unpack("<4sIiId", head)
        if magic != _SPARSE_MAGIC:
            raise ValueError(f"{path}: not a sparse kernel cache file")
        if version != _CACHE_VERSION:
            raise ValueError(f"{path}: unsupported cache version {version}")
        link_hash = f.read(32)
        (count,) = struct.unpack("<Q", f.read(8))
        rec = np.frombuffer(f.read(count * _SPARSE_RECORD.itemsize),
                            dtype=_SPARSE_RECORD)
    values = rec["re"] + 1j * rec["im"]
    kappa = rec["kappa"].astype(np.int32)
    center = (kappa == 0).all(axis=1)
    h0 = complex(values[center][0]) if center.any() else 0.0
    return TimeKernelSparse(nu=nu, n_fft=n_fft, clip_level=clip,
                            kappa=kappa, values=values, center_value=h0), link_hash
