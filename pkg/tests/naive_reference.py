"""Independent brute-force reference implementations used as test oracles.

Everything here is written as plain loops, straight from the model
definitions, sharing no code with the package internals.
"""

import numpy as np
from scipy.linalg import expm


def naive_reg_td(a, interferers, phi_nl, td_kernels, probe_nu=0):
    """Triple-loop regular time-domain model; zero symbols off the ends."""
    n = len(a)
    y = np.array(a, dtype=complex, copy=True)
    for k in range(n):
        acc = np.zeros(2, dtype=complex)
        for nu, kern in td_kernels.items():
            pump = a if nu == probe_nu else interferers[nu]
            for (k1, k2, k3), h in zip(kern.kappa, kern.values):
                a3 = _at(a, k + k3)
                if nu == probe_nu:
                    acc += phi_nl[nu] * _at(a, k + k1) \
                        * (np.conj(_at(a, k + k2)) @ a3) * h
                else:
                    b1 = _at(pump, k + k1)
                    b2c = np.conj(_at(pump, k + k2))
                    acc += phi_nl[nu] * (b1 * (b2c @ a3) + (b2c @ b1) * a3) * h
        y[k] += -1j * acc
    return y


def naive_reglog_td(a, interferers, phi_nl, td_kernels, probe_nu=0):
    """Loop implementation of the regular-logarithmic time-domain model."""
    n = len(a)
    y = np.empty_like(np.asarray(a, dtype=complex))
    for k in range(n):
        delta = np.zeros(2, dtype=complex)
        phase = 0.0 + 0.0j
        smat = np.zeros((2, 2), dtype=complex)
        for nu, kern in td_kernels.items():
            phn = phi_nl[nu]
            if nu == probe_nu:
                for (k1, k2, k3), h in zip(kern.kappa, kern.values):
                    mult = (k1 == 0 and k2 != 0 and k3 != 0) or \
                           (k3 == 0 and k2 != 0 and k1 != 0) or \
                           (k1 == 0 and k2 == 0 and k3 == 0)
                    if not mult:
                        delta += phn * _at(a, k + k1) \
                            * (np.conj(_at(a, k + k2)) @ _at(a, k + k3)) * h
                    if k3 == 0 and k1 != 0 and k2 != 0:
                        # trace / traceless split of a1 a2^H acting on a[k]
                        a1 = _at(a, k + k1)
                        a2c = np.conj(_at(a, k + k2))
                        phase += -1.5 * phn * (a2c @ a1) * h
                        outer = np.outer(a1, a2c)
                        smat += -0.5 * phn * (2.0 * outer
                                              - (a2c @ a1) * np.eye(2)) * h
                ak = np.asarray(a[k])
                phase += -phn * (np.conj(ak) @ ak).real \
                    * kern.center_value.real
            else:
                b = interferers[nu]
                for (k1, k2, k3), h in zip(kern.kappa, kern.values):
                    mult = (k3 == 0 and k2 != 0 and k1 != 0) or \
                           (k1 == 0 and k2 == 0 and k3 == 0)
                    if not mult:
                        b1 = _at(b, k + k1)
                        b2c = np.conj(_at(b, k + k2))
                        a3 = _at(a, k + k3)
                        delta += phn * (b1 * (b2c @ a3) + (b2c @ b1) * a3) * h
                    else:
                        # trace / traceless split of b1 b2^H + (b2^H b1) I
                        b1 = _at(b, k + k1)
                        b2c = np.conj(_at(b, k + k2))
                        phase += -1.5 * phn * (b2c @ b1) * h
                        outer = np.outer(b1, b2c)
                        smat += -0.5 * phn * (2.0 * outer
                                              - (b2c @ b1) * np.eye(2)) * h
        rot = expm(1j * (phase.real * np.eye(2) + smat))
        y[k] = rot @ (np.asarray(a[k], dtype=complex) + (-1j) * delta)
    return y


def naive_fd_block(a_block, phi, grid_values):
    """Literal frequency-domain double sum on one cyclic block (probe only)."""
    n = len(a_block)
    A = np.fft.fft(np.asarray(a_block, dtype=complex), axis=0)
    dA = np.zeros_like(A)
    for mu in range(n):
        acc = np.zeros(2, dtype=complex)
        for m1 in range(n):
            for m2 in range(n):
                m3 = (mu - m1 + m2) % n
                acc += A[m1] * (np.conj(A[m2]) @ A[m3]) \
                    * grid_values[m1, m2, m3]
        dA[mu] = -1j * phi / n**2 * acc
    return np.fft.ifft(A + dA, axis=0)


def _at(seq, idx):
    if 0 <= idx < len(seq):
        return np.asarray(seq[idx], dtype=complex)
    return np.zeros(2, dtype=complex)
