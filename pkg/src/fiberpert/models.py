"""First-order end-to-end channel models.

Four variants map transmit symbol sequences of the probe (and optional
interferer channels) to received symbol sequences:

* ``reg_td``    -- regular (purely additive) model, time-domain triple sum.
* ``reg_fd``    -- the same model evaluated block-wise over the discrete
                   1/T-periodic frequency grid with overlap-save stitching.
* ``reglog_td`` -- combined regular-logarithmic model: degenerate symbol
                   combinations act multiplicatively as a common phase plus a
                   rotation of the state of polarization.
* ``reglog_fd`` -- frequency-domain counterpart using per-block average
                   phase/polarization rotations.

Symbols outside the transmitted block are treated as zeros.  All models are
deterministic: summation orders are fixed (lexicographic kernel entries,
ascending frequency indices within a block).
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .jones import rotate
from .kernels import classify_sets_td

log = logging.getLogger(__name__)

# dense-cube evaluation pays off once the clipped kernel stops being sparse
_DENSE_MAX_NFFT = 128


@dataclass(frozen=True)
class BlockFrame:
    """Overlap-save block geometry: block length and total overlap.

    The overlap is split half/half around the kept centre region, so it must
    be even; each block contributes ``n_fft - overlap`` output symbols.
    """

    n_fft: int
    overlap: int

    def __post_init__(self):
        if not 0 < self.overlap < self.n_fft:
            raise ValueError("need 0 < overlap < n_fft")
        if self.overlap % 2:
            raise ValueError("overlap must be even")

    @property
    def step(self):
        return self.n_fft - self.overlap


@dataclass
class ModelInput:
    """Everything a model evaluation needs.

    ``phi_nl`` maps channel index to the per-channel nonlinear phase in rad;
    it must contain the probe and every declared interferer.  Kernels are
    supplied per channel index; the time-domain models read ``td_kernels``,
    the frequency-domain models ``fd_kernels``.
    """

    probe: np.ndarray
    probe_nu: int = 0
    phi_nl: dict = field(default_factory=dict)
    interferers: dict = field(default_factory=dict)
    td_kernels: dict = field(default_factory=dict)
    fd_kernels: dict = field(default_factory=dict)

    def __post_init__(self):
        self.probe = np.asarray(self.probe, dtype=complex)
        if self.probe.ndim != 2 or self.probe.shape[1] != 2:
            raise ValueError("probe sequence must have shape (N, 2)")
        for nu, b in self.interferers.items():
            b = np.asarray(b, dtype=complex)
            if b.shape != self.probe.shape:
                raise ValueError(f"interferer {nu} length differs from probe")
            self.interferers[nu] = b

    def channel_indices(self):
        return [self.probe_nu] + sorted(self.interferers)

    def require(self, kernels, nu):
        if nu not in kernels:
            raise ValueError(f"no kernel available for channel {nu}")
        if nu not in self.phi_nl:
            raise ValueError(f"no nonlinear phase given for channel {nu}")
        return kernels[nu]


# --------------------------------------------------------------------------
# overlap-save plumbing
# --------------------------------------------------------------------------

def overlap_save_split(seq, frame):
    """
    Split a symbol sequence into overlapping, zero-padded blocks.

    Block ``lam`` covers input indices ``lam*step - overlap/2`` onward; the
    centre ``step`` symbols of each block are the ones its processing result
    is kept for.

    Parameters
    ----------
    seq : np.array of shape (N, 2)
    frame : BlockFrame

    Returns
    -------
    np.array of shape (n_blocks, n_fft, 2)
    """
    seq = np.asarray(seq)
    n = seq.shape[0]
    if n < frame.n_fft:
        raise ValueError("sequence shorter than one block")
    step = frame.step
    half = frame.overlap // 2
    n_blocks = -(-n // step)
    blocks = np.zeros((n_blocks, frame.n_fft) + seq.shape[1:], dtype=seq.dtype)
    for lam in range(n_blocks):
        start = lam * step - half
        lo, hi = max(start, 0), min(start + frame.n_fft, n)
        blocks[lam, lo - start:hi - start] = seq[lo:hi]
    return blocks


def overlap_save_append(blocks, frame, n_total):
    """
    Stitch processed blocks back together (inverse of the split).

    Each output symbol is produced by exactly one block; the final block is
    truncated to the requested total length.
    """
    step = frame.step
    half = frame.overlap // 2
    out = np.empty((n_total,) + blocks.shape[2:], dtype=blocks.dtype)
    for lam in range(blocks.shape[0]):
        lo = lam * step
        hi = min(lo + step, n_total)
        out[lo:hi] = blocks[lam, half:half + hi - lo]
    return out


# --------------------------------------------------------------------------
# time-domain models
# --------------------------------------------------------------------------

def _shift_view(seq, n_window):
    """View ``v[i, k] = seq[k + i - n_window//2]`` with zero boundary."""
    n = seq.shape[0]
    half = n_window // 2
    buf = np.zeros((n + n_window,) + seq.shape[1:], dtype=complex)
    buf[half:half + n] = seq
    view = np.lib.stride_tricks.sliding_window_view(buf, n, axis=0)
    # windowed axis is appended last; bring it to the middle -> (W, N, 2)
    return np.ascontiguousarray(np.moveaxis(view, -1, 1)[:n_window])


def _entry_cube(kappa, values, n_fft):
    cube = np.zeros((n_fft, n_fft, n_fft), dtype=complex)
    idx = kappa + n_fft // 2
    cube[idx[:, 0], idx[:, 1], idx[:, 2]] = values
    return cube


def _triple_sum_dense(cube, pump, probe):
    """Triple kernel sum with a dense centered cube.

    Returns ``(direct, extra)`` where ``direct[k]`` is
    ``sum pump[k+k1] (pump^H[k+k2] . d[k])`` with ``d`` the inner kernel
    convolution over the probe's third index, and ``extra[k]`` is the
    scalar-coupled companion ``sum (pump^H[k+k2] pump[k+k1]) d[k]`` that
    only cross-channel terms add.
    """
    w = cube.shape[0]
    n = probe.shape[1]
    probe2 = probe.reshape(w, -1)
    delta = np.zeros((n, 2), dtype=complex)
    extra = np.zeros((n, 2), dtype=complex)
    pump_c = np.conj(pump)
    for i1 in range(w):
        d = (cube[i1] @ probe2).reshape(w, n, 2)
        inner = (pump_c * d).sum(axis=-1)
        delta += pump[i1] * inner.sum(axis=0)[:, None]
        c2 = (pump_c * pump[i1][None]).sum(axis=-1)
        extra += np.einsum("mk,mkp->kp", c2, d)
    return delta, extra


def _triple_sum_sparse(kappa, values, n_fft, pump, probe):
    """Sparse-entry evaluation of the same sums, grouped by (k1, k2)."""
    n = probe.shape[1]
    half = n_fft // 2
    delta = np.zeros((n, 2), dtype=complex)
    extra = np.zeros((n, 2), dtype=complex)
    if len(values) == 0:
        return delta, extra
    order = np.lexsort((kappa[:, 2], kappa[:, 1], kappa[:, 0]))
    kap = kappa[order]
    val = values[order]
    pair_change = np.flatnonzero(np.any(np.diff(kap[:, :2], axis=0) != 0, axis=1)) + 1
    starts = np.concatenate([[0], pair_change, [len(val)]])
    pump_c = np.conj(pump)
    for s, e in zip(starts[:-1], starts[1:]):
        i1 = kap[s, 0] + half
        i2 = kap[s, 1] + half
        i3 = kap[s:e, 2] + half
        d = np.tensordot(val[s:e], probe[i3], axes=(0, 0))
        inner = (pump_c[i2] * d).sum(axis=-1)
        delta += pump[i1] * inner[:, None]
        c2 = (pump_c[i2] * pump[i1]).sum(axis=-1)
        extra += c2[:, None] * d
    return delta, extra


def _triple_sum(kappa, values, n_fft, pump, probe):
    if n_fft <= _DENSE_MAX_NFFT and len(values) > 4 * n_fft**2:
        cube = _entry_cube(kappa, values, n_fft)
        return _triple_sum_dense(cube, pump, probe)
    return _triple_sum_sparse(kappa, values, n_fft, pump, probe)


def reg_td(inp):
    """
    Regular (additive) end-to-end model in discrete time.

    Evaluates the kernel-weighted triple sums over all stored kernel entries
    for the probe and each interferer and returns ``a + delta_a``.

    Parameters
    ----------
    inp : ModelInput
        Needs ``td_kernels`` for the probe and every interferer.

    Returns
    -------
    np.array of shape (N, 2)
        Received symbol sequence.
    """
    a = inp.probe
    delta = np.zeros_like(a)
    for nu in inp.channel_indices():
        kern = inp.require(inp.td_kernels, nu)
        phi = inp.phi_nl[nu]
        if phi == 0.0 or len(kern.values) == 0:
            continue
        probe_sh = _shift_view(a, kern.n_fft)
        if nu == inp.probe_nu:
            direct, _ = _triple_sum(kern.kappa, kern.values, kern.n_fft,
                                    probe_sh, probe_sh)
            delta += phi * direct
        else:
            pump_sh = _shift_view(inp.interferers[nu], kern.n_fft)
            direct, extra = _triple_sum(kern.kappa, kern.values, kern.n_fft,
                                        pump_sh, probe_sh)
            delta += phi * (direct + extra)
    return a + (-1j) * delta


def _pair_plane_sums(kappa, values, shifted, n_fft, chunk=256):
    """Accumulate phase and Stokes sums over (k1, k2) kernel-plane entries.

    Returns ``(phase_sum, stokes_sum)`` with ``phase_sum[k]`` equal to
    ``sum <v[k+k2] | v[k+k1]> h`` and ``stokes_sum[k, i]`` equal to
    ``sum <v[k+k2] | sigma_i | v[k+k1]> h``: the conjugated side is the
    second index, matching the trace/traceless split of the degenerate
    outer-product terms.  Both sums are real up to rounding thanks to the
    conjugate pairing of the kernel plane.
    """
    n = shifted.shape[1]
    half = n_fft // 2
    phase = np.zeros(n, dtype=complex)
    stokes = np.zeros((n, 3), dtype=complex)
    for s in range(0, len(values), chunk):
        k = kappa[s:s + chunk]
        h = values[s:s + chunk]
        ket = shifted[k[:, 0] + half]
        bra = shifted[k[:, 1] + half]
        bx, by = np.conj(bra[..., 0]), np.conj(bra[..., 1])
        kx, ky = ket[..., 0], ket[..., 1]
        phase += h @ (bx * kx + by * ky)
        stokes[:, 0] += h @ (bx * kx - by * ky)
        stokes[:, 1] += h @ (bx * ky + by * kx)
        stokes[:, 2] += h @ (1j * (by * kx - bx * ky))
    return phase, stokes


def reglog_td(inp):
    """
    Combined regular-logarithmic model in discrete time.

    Degenerate kernel entries are taken out of the additive triple sum and
    applied as a per-symbol common phase and a unitary rotation of the state
    of polarization around a per-symbol Stokes vector; the rotation acts on
    the already-perturbed vector.

    Parameters
    ----------
    inp : ModelInput
        Needs ``td_kernels`` for the probe and every interferer.

    Returns
    -------
    np.array of shape (N, 2)
        Received symbol sequence; ``|y[k]| = |a[k] + delta_a[k]|`` holds
        exactly up to rounding.
    """
    a = inp.probe
    n = a.shape[0]
    delta = np.zeros_like(a)
    phase = np.zeros(n)
    stokes = np.zeros((n, 3))
    for nu in inp.channel_indices():
        kern = inp.require(inp.td_kernels, nu)
        phi = inp.phi_nl[nu]
        if phi == 0.0 or len(kern.values) == 0:
            continue
        is_probe = nu == inp.probe_nu
        add_mask, _ = classify_sets_td(kern, is_probe)
        probe_sh = _shift_view(a, kern.n_fft)
        k1, k2, k3 = kern.kappa[:, 0], kern.kappa[:, 1], kern.kappa[:, 2]
        if is_probe:
            direct, _ = _triple_sum(kern.kappa[add_mask], kern.values[add_mask],
                                    kern.n_fft, probe_sh, probe_sh)
            delta += phi * direct
            plane = (k3 == 0) & (k1 != 0) & (k2 != 0)
            psum, ssum = _pair_plane_sums(kern.kappa[plane], kern.values[plane],
                                          probe_sh, kern.n_fft)
            phase += -1.5 * phi * psum.real
            stokes += -0.5 * phi * ssum.real
            # centre tap: pure self-phase, no rotation
            power = (a * np.conj(a)).real.sum(axis=1)
            phase += -phi * power * kern.center_value.real
        else:
            pump_sh = _shift_view(inp.interferers[nu], kern.n_fft)
            direct, extra = _triple_sum(kern.kappa[add_mask], kern.values[add_mask],
                                        kern.n_fft, pump_sh, probe_sh)
            delta += phi * (direct + extra)
            plane = ((k3 == 0) & (k1 != 0) & (k2 != 0)) | \
                    ((k1 == 0) & (k2 == 0) & (k3 == 0))
            psum, ssum = _pair_plane_sums(kern.kappa[plane], kern.values[plane],
                                          pump_sh, kern.n_fft)
            phase += -1.5 * phi * psum.real
            stokes += -0.5 * phi * ssum.real
    return rotate(phase, stokes, a + (-1j) * delta)


# --------------------------------------------------------------------------
# frequency-domain models
# --------------------------------------------------------------------------

def _fd_reindex(values):
    """Re-index the kernel cube to ``Hr[mu1, delta, mu2]`` with
    ``mu3 = (delta + mu2) mod N``, the layout the block evaluation uses."""
    n = values.shape[0]
    mu = np.arange(n)
    idx3 = (mu[:, None] + mu[None, :]) % n
    m2 = np.broadcast_to(mu[None, :], (n, n))
    return values[:, m2, idx3]


def _fd_check_overlap(inp, frame):
    for nu, kern in inp.td_kernels.items():
        if frame.overlap // 2 < kern.memory():
            log.warning("overlap %d is smaller than twice the kernel memory %d "
                        "of channel %d; block edges will leak", frame.overlap,
                        kern.memory(), nu)
            return
    if not inp.td_kernels and frame.overlap < frame.n_fft // 2:
        log.warning("overlap %d below n_fft/2 = %d; may not cover the kernel "
                    "memory", frame.overlap, frame.n_fft // 2)


def _fd_block_delta(A, Ar, Hr, idx_out, pump_A=None):
    """One block's perturbation spectrum (without the -j*phi/N^2 factor)."""
    if pump_A is None:
        c = (np.conj(A)[None, :, :] * Ar).sum(axis=-1)
        f = np.einsum("pdm,dm->pd", Hr, c)
        fg = f[np.arange(f.shape[0])[:, None], idx_out]
        return np.einsum("pc,pm->mc", A, fg)
    B = pump_A
    c1 = (np.conj(B)[None, :, :] * Ar).sum(axis=-1)
    f1 = np.einsum("pdm,dm->pd", Hr, c1)
    fg1 = f1[np.arange(f1.shape[0])[:, None], idx_out]
    out = np.einsum("pc,pm->mc", B, fg1)
    c2 = np.einsum("mc,pc->mp", np.conj(B), B)
    g2 = np.einsum("mp,dmc,pdm->pdc", c2, Ar, Hr)
    g2g = g2[np.arange(g2.shape[0])[:, None], idx_out]
    out += g2g.sum(axis=0)
    return out


def reg_fd(inp, frame):
    """
    Regular model over the discrete 1/T-periodic frequency grid.

    The symbol sequence is cut into overlapping blocks; per block the
    spectrum receives the kernel-weighted double sum over frequency-index
    pairs (the third index follows from the modulo-reduced frequency
    matching), and the centre symbols of each processed block are stitched
    back together.

    Parameters
    ----------
    inp : ModelInput
        Needs ``fd_kernels`` at ``frame.n_fft`` for probe and interferers.
    frame : BlockFrame

    Returns
    -------
    np.array of shape (N, 2)
    """
    return _fd_model(inp, frame, reglog=False)


def reglog_fd(inp, frame):
    """
    Regular-logarithmic model over the discrete frequency grid.

    Like :func:`reg_fd` but the degenerate index pairs are excluded from the
    additive double sum and applied instead as one average phase and one
    average polarization rotation per block, acting on the perturbed block
    spectrum.

    Parameters
    ----------
    inp : ModelInput
    frame : BlockFrame

    Returns
    -------
    np.array of shape (N, 2)
    """
    return _fd_model(inp, frame, reglog=True)


def _fd_model(inp, frame, reglog):
    a = inp.probe
    n = frame.n_fft
    n_sym = a.shape[0]
    grids = {}
    for nu in inp.channel_indices():
        kern = inp.require(inp.fd_kernels, nu)
        if kern.n_fft != n:
            if kern.n_fft % n == 0:
                kern = kern.subsample(kern.n_fft // n)
            else:
                raise ValueError(
                    f"kernel grid of channel {nu} ({kern.n_fft}) does not "
                    f"match the processing block length ({n})")
        grids[nu] = kern
    _fd_check_overlap(inp, frame)

    mu = np.arange(n)
    idx_out = (mu[None, :] - mu[:, None]) % n   # [mu1, mu] -> delta
    idx3 = (mu[:, None] + mu[None, :]) % n      # [delta, mu2] -> mu3

    hr = {}
    for nu, kern in grids.items():
        r = _fd_reindex(kern.values)
        if reglog:
            # exclude the degenerate pairs from the additive double sum:
            # mu2 == mu1 always, mu2 == mu3 (delta == 0) only for the probe
            r = r.copy()
            r[mu, :, mu] = 0.0
            if nu == inp.probe_nu:
                r[:, 0, :] = 0.0
        hr[nu] = r

    blocks_a = overlap_save_split(a, frame)
    blocks_b = {nu: overlap_save_split(b, frame)
                for nu, b in inp.interferers.items()}
    out_blocks = np.empty_like(blocks_a)
    scale = 1.0 / n**2
    for lam in range(blocks_a.shape[0]):
        A = np.fft.fft(blocks_a[lam], axis=0)
        Ar = A[idx3]
        dA = (-1j * inp.phi_nl[inp.probe_nu] * scale) * _fd_block_delta(
            A, Ar, hr[inp.probe_nu], idx_out)
        phase = 0.0
        stokes = np.zeros(3)
        if reglog:
            pw = (A * np.conj(A)).real.sum(axis=1)
            phase += -1.5 * inp.phi_nl[inp.probe_nu] * scale * pw.sum()
            sx = np.conj(A[:, 0]) * A[:, 1]
            s_blk = np.array([
                ((A[:, 0] * np.conj(A[:, 0]) - A[:, 1] * np.conj(A[:, 1])).real).sum(),
                2.0 * sx.real.sum(),
                2.0 * sx.imag.sum(),
            ])
            stokes = stokes - 0.5 * inp.phi_nl[inp.probe_nu] * scale * s_blk
        for nu, blocks in blocks_b.items():
            B = np.fft.fft(blocks[lam], axis=0)
            dA += (-1j * inp.phi_nl[nu] * scale) * _fd_block_delta(
                A, Ar, hr[nu], idx_out, pump_A=B)
            if reglog:
                pw = (B * np.conj(B)).real.sum(axis=1)
                phase += -1.5 * inp.phi_nl[nu] * scale * pw.sum()
                sx = np.conj(B[:, 0]) * B[:, 1]
                s_blk = np.array([
                    ((B[:, 0] * np.conj(B[:, 0]) - B[:, 1] * np.conj(B[:, 1])).real).sum(),
                    2.0 * sx.real.sum(),
                    2.0 * sx.imag.sum(),
                ])
                stokes = stokes - 0.5 * inp.phi_nl[nu] * scale * s_blk
        Y = A + dA
        if reglog:
            Y = rotate(phase, stokes, Y)
        out_blocks[lam] = np.fft.ifft(Y, axis=0)
    return overlap_save_append(out_blocks, frame, n_sym)
