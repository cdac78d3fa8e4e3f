"""Jones-vector / Stokes-vector / Pauli-matrix algebra for dual-polarization fields.

All functions accept batched inputs: a Jones vector is an array of shape
``(..., 2)``, a Stokes vector an array of shape ``(..., 3)``.  The Pauli basis
is the permuted set common in polarization optics (diagonal matrix first).
"""

import numpy as np

SIGMA_1 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SIGMA_2 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_3 = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)

#: Pauli vector, shape (3, 2, 2).
PAULI = np.stack([SIGMA_1, SIGMA_2, SIGMA_3])

# Below this norm the rotation axis is treated as analytically zero
# (sin(r)/r -> 1) to avoid 0/0.
_AXIS_EPS = 1e-30


def jones_to_stokes(u):
    """
    Map a Jones vector to its real Stokes vector.

    Parameters
    ----------
    u : np.array of shape (..., 2)
        Complex Jones vector(s).

    Returns
    -------
    s : np.array of shape (..., 3)
        Real Stokes vector(s) with components ``u^H sigma_i u``.  The norm
        of ``s`` equals the power ``|u_x|^2 + |u_y|^2`` for pure states.
    """
    u = np.asarray(u)
    ux, uy = u[..., 0], u[..., 1]
    cross = np.conj(ux) * uy
    s = np.empty(u.shape[:-1] + (3,), dtype=float)
    s[..., 0] = (ux * np.conj(ux) - uy * np.conj(uy)).real
    s[..., 1] = 2.0 * cross.real
    s[..., 2] = 2.0 * cross.imag
    return s


def pauli_expand(s):
    """
    Expand a Stokes vector into the 2x2 matrix ``s . sigma``.

    Parameters
    ----------
    s : np.array of shape (..., 3)
        Real (or complex) Stokes-space vector(s).

    Returns
    -------
    m : np.array of shape (..., 2, 2)
        Hermitian, traceless matrix ``s1*sigma_1 + s2*sigma_2 + s3*sigma_3``
        (Hermitian for real ``s``).
    """
    s = np.asarray(s)
    m = np.empty(s.shape[:-1] + (2, 2), dtype=complex)
    m[..., 0, 0] = s[..., 0]
    m[..., 1, 1] = -s[..., 0]
    m[..., 0, 1] = s[..., 1] - 1j * s[..., 2]
    m[..., 1, 0] = s[..., 1] + 1j * s[..., 2]
    return m


def outer_decompose(u):
    """
    Decompose the outer product ``u u^H`` into power and Stokes parts.

    The identity ``u u^H = (power * I + pauli_expand(s)) / 2`` holds with the
    returned pair.

    Parameters
    ----------
    u : np.array of shape (..., 2)
        Complex Jones vector(s).

    Returns
    -------
    power : np.array of shape (...)
        Instantaneous power ``|u_x|^2 + |u_y|^2``.
    s : np.array of shape (..., 3)
        Stokes vector of ``u``.
    """
    u = np.asarray(u)
    power = (u * np.conj(u)).real.sum(axis=-1)
    return power, jones_to_stokes(u)


def unitary_rotation(phi, s):
    """
    Closed-form matrix exponential ``exp(j*phi*I + j*pauli_expand(s))``.

    Since ``(s . sigma)^2 = ||s||^2 * I`` the exponential reduces to
    ``exp(j*phi) * (cos(r) * I + j*sin(r)/r * (s . sigma))`` with
    ``r = ||s||``; the ``r -> 0`` limit is taken analytically.

    Parameters
    ----------
    phi : scalar or np.array of shape (...)
        Common phase in radians.
    s : np.array of shape (..., 3)
        Real rotation vector in Stokes space (radians).

    Returns
    -------
    m : np.array of shape (..., 2, 2)
        Unitary Jones rotation matrix.
    """
    phi = np.asarray(phi, dtype=float)
    s = np.asarray(s, dtype=float)
    r = np.sqrt((s * s).sum(axis=-1))
    sinc = np.where(r < _AXIS_EPS, 1.0, np.sin(r) / np.where(r < _AXIS_EPS, 1.0, r))
    lead = np.exp(1j * phi)
    eye = np.eye(2, dtype=complex)
    m = np.cos(r)[..., None, None] * eye + 1j * sinc[..., None, None] * pauli_expand(s)
    return lead[..., None, None] * m


def rotate(phi, s, v):
    """
    Apply ``unitary_rotation(phi, s)`` to Jones vector(s) without forming
    the matrix, vectorized over leading axes.

    Parameters
    ----------
    phi : np.array of shape (...)
    s : np.array of shape (..., 3)
    v : np.array of shape (..., 2)

    Returns
    -------
    np.array of shape (..., 2)
        Rotated Jones vector(s); the norm of each vector is preserved.
    """
    phi = np.asarray(phi, dtype=float)
    s = np.asarray(s, dtype=float)
    v = np.asarray(v)
    r = np.sqrt((s * s).sum(axis=-1))
    safe = np.where(r < _AXIS_EPS, 1.0, r)
    sinc = np.where(r < _AXIS_EPS, 1.0, np.sin(r) / safe)
    vx, vy = v[..., 0], v[..., 1]
    # (s . sigma) v, expanded component-wise
    wx = s[..., 0] * vx + (s[..., 1] - 1j * s[..., 2]) * vy
    wy = (s[..., 1] + 1j * s[..., 2]) * vx - s[..., 0] * vy
    lead = np.exp(1j * phi)
    out = np.empty_like(np.broadcast_arrays(v, s[..., :2])[0], dtype=complex)
    out[..., 0] = lead * (np.cos(r) * vx + 1j * sinc * wx)
    out[..., 1] = lead * (np.cos(r) * vy + 1j * sinc * wy)
    return out
