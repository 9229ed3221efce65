"""Numba RK4 integration kernels.

Fixed-step classical RK4 for the Schrodinger equation (pure state,
hbar = 1) and the Bloch equations with pure dephasing. The oscillatory
drive factors cos(w t + phi) are advanced by half-step phasor rotation
(two complex multiplications per step) instead of calling cos at every
stage; the accumulated phasor round-off over 1e6 steps is ~1e-10,
far below every tolerance used downstream.

Batch kernels parallelize over independent work items with prange; each
item writes only its own output slot, so results are bit-identical for
any thread count.

Time averages accumulate trapezoidally over *all* integration steps:
mean = (p_0/2 + p_1 + ... + p_{N-1} + p_N/2) / N.

Recorded samples are taken every `stride` steps starting at step 0; the
final step is appended when nsteps is not a stride multiple.
"""

import numpy as np
from numba import njit, prange

__all__ = [
    "n_records",
    "rwa_schrodinger_traj",
    "rwa_schrodinger_batch",
    "rwa_schrodinger_series_batch",
    "lab_schrodinger_traj",
    "lab_schrodinger_batch",
    "rwa_bloch_traj",
    "rwa_bloch_batch",
]


@njit(cache=True)
def n_records(nsteps, stride):
    n = nsteps // stride + 1
    if nsteps % stride != 0:
        n += 1
    return n


@njit(cache=True, fastmath=True)
def _rwa_schrodinger_core(delta, rabi, mod, omega, phi, dt, nsteps,
                          stride, psi, p_rec, psi_rec, record):
    r0, i0, r1, i1 = psi[0], psi[1], psi[2], psi[3]
    cp = np.cos(phi)
    sp = np.sin(phi)
    ch = np.cos(omega * dt * 0.5)
    sh = np.sin(omega * dt * 0.5)
    hd = 0.5 * delta
    g = 0.5 * rabi
    p = r0 * r0 + i0 * i0
    acc = 0.5 * p
    idx = 0
    if record:
        p_rec[0] = p
        psi_rec[0, 0] = r0 + 1j * i0
        psi_rec[0, 1] = r1 + 1j * i1
        idx = 1
    for k in range(nsteps):
        c2 = cp * ch - sp * sh
        s2 = sp * ch + cp * sh
        c4 = c2 * ch - s2 * sh
        s4 = s2 * ch + c2 * sh
        a1 = hd + mod * cp
        a2 = hd + mod * c2
        a4 = hd + mod * c4
        # k1
        k1r0 = a1 * i0 + g * i1
        k1i0 = -(a1 * r0 + g * r1)
        k1r1 = g * i0 - a1 * i1
        k1i1 = -(g * r0 - a1 * r1)
        # k2
        tr0 = r0 + 0.5 * dt * k1r0
        ti0 = i0 + 0.5 * dt * k1i0
        tr1 = r1 + 0.5 * dt * k1r1
        ti1 = i1 + 0.5 * dt * k1i1
        k2r0 = a2 * ti0 + g * ti1
        k2i0 = -(a2 * tr0 + g * tr1)
        k2r1 = g * ti0 - a2 * ti1
        k2i1 = -(g * tr0 - a2 * tr1)
        # k3
        tr0 = r0 + 0.5 * dt * k2r0
        ti0 = i0 + 0.5 * dt * k2i0
        tr1 = r1 + 0.5 * dt * k2r1
        ti1 = i1 + 0.5 * dt * k2i1
        k3r0 = a2 * ti0 + g * ti1
        k3i0 = -(a2 * tr0 + g * tr1)
        k3r1 = g * ti0 - a2 * ti1
        k3i1 = -(g * tr0 - a2 * tr1)
        # k4
        tr0 = r0 + dt * k3r0
        ti0 = i0 + dt * k3i0
        tr1 = r1 + dt * k3r1
        ti1 = i1 + dt * k3i1
        k4r0 = a4 * ti0 + g * ti1
        k4i0 = -(a4 * tr0 + g * tr1)
        k4r1 = g * ti0 - a4 * ti1
        k4i1 = -(g * tr0 - a4 * tr1)
        s = dt / 6.0
        r0 += s * (k1r0 + 2.0 * k2r0 + 2.0 * k3r0 + k4r0)
        i0 += s * (k1i0 + 2.0 * k2i0 + 2.0 * k3i0 + k4i0)
        r1 += s * (k1r1 + 2.0 * k2r1 + 2.0 * k3r1 + k4r1)
        i1 += s * (k1i1 + 2.0 * k2i1 + 2.0 * k3i1 + k4i1)
        cp = c4
        sp = s4
        p = r0 * r0 + i0 * i0
        acc += p
        if record and ((k + 1) % stride == 0 or k == nsteps - 1):
            p_rec[idx] = p
            psi_rec[idx, 0] = r0 + 1j * i0
            psi_rec[idx, 1] = r1 + 1j * i1
            idx += 1
    acc -= 0.5 * p
    norm = r0 * r0 + i0 * i0 + r1 * r1 + i1 * i1
    return acc / nsteps, p, norm


@njit(cache=True)
def rwa_schrodinger_traj(delta, rabi, mod, omega, phi, psi0, dt, nsteps, stride):
    nrec = n_records(nsteps, stride)
    p_rec = np.empty(nrec)
    psi_rec = np.empty((nrec, 2), dtype=np.complex128)
    mean, endp, norm = _rwa_schrodinger_core(
        delta, rabi, mod, omega, phi, dt, nsteps, stride, psi0,
        p_rec, psi_rec, True)
    return p_rec, psi_rec, mean, norm


@njit(cache=True, parallel=True)
def rwa_schrodinger_batch(delta, rabi, mod, omega, phi, dt, nsteps):
    m = delta.shape[0]
    mean = np.empty(m)
    endp = np.empty(m)
    norm = np.empty(m)
    dummy_p = np.empty(1)
    dummy_psi = np.empty((1, 2), dtype=np.complex128)
    psi0 = np.array([1.0, 0.0, 0.0, 0.0])
    for j in prange(m):
        mean[j], endp[j], norm[j] = _rwa_schrodinger_core(
            delta[j], rabi, mod, omega[j], phi[j], dt, nsteps, nsteps,
            psi0, dummy_p, dummy_psi, False)
    return mean, endp, norm


@njit(cache=True, parallel=True)
def rwa_schrodinger_series_batch(delta, rabi, mod, omega, phi, dt,
                                 nsteps, stride):
    m = delta.shape[0]
    nrec = n_records(nsteps, stride)
    series = np.empty((m, nrec))
    mean = np.empty(m)
    psi0 = np.array([1.0, 0.0, 0.0, 0.0])
    for j in prange(m):
        psi_rec = np.empty((nrec, 2), dtype=np.complex128)
        mean[j], _, _ = _rwa_schrodinger_core(
            delta[j], rabi, mod, omega[j], phi[j], dt, nsteps, stride,
            psi0, series[j], psi_rec, True)
    return series, mean


@njit(cache=True, fastmath=True)
def _lab_schrodinger_core(half_delta, amp, carrier, phase, dt, nsteps,
                          stride, psi, p_rec, psi_rec, record):
    nd = carrier.shape[0]
    r0, i0, r1, i1 = psi[0], psi[1], psi[2], psi[3]
    cp = np.empty(nd)
    sp = np.empty(nd)
    ch = np.empty(nd)
    sh = np.empty(nd)
    for d in range(nd):
        cp[d] = np.cos(phase[d])
        sp[d] = np.sin(phase[d])
        ch[d] = np.cos(carrier[d] * dt * 0.5)
        sh[d] = np.sin(carrier[d] * dt * 0.5)
    p = r0 * r0 + i0 * i0
    acc = 0.5 * p
    idx = 0
    if record:
        p_rec[0] = p
        psi_rec[0, 0] = r0 + 1j * i0
        psi_rec[0, 1] = r1 + 1j * i1
        idx = 1
    for k in range(nsteps):
        # Hamiltonian entries at the three RK4 stage times
        a1 = half_delta
        gr1 = 0.0
        gi1 = 0.0
        a2 = half_delta
        gr2 = 0.0
        gi2 = 0.0
        a4 = half_delta
        gr4 = 0.0
        gi4 = 0.0
        for d in range(nd):
            c1 = cp[d]
            c2 = cp[d] * ch[d] - sp[d] * sh[d]
            s2 = sp[d] * ch[d] + cp[d] * sh[d]
            c4 = c2 * ch[d] - s2 * sh[d]
            s4 = s2 * ch[d] + c2 * sh[d]
            ax = amp[d, 0]
            ay = amp[d, 1]
            az = amp[d, 2]
            a1 += az * c1
            gr1 += ax * c1
            gi1 -= ay * c1
            a2 += az * c2
            gr2 += ax * c2
            gi2 -= ay * c2
            a4 += az * c4
            gr4 += ax * c4
            gi4 -= ay * c4
            cp[d] = c4
            sp[d] = s4
        # k1
        k1r0 = a1 * i0 + gr1 * i1 + gi1 * r1
        k1i0 = -(a1 * r0 + gr1 * r1 - gi1 * i1)
        k1r1 = gr1 * i0 - gi1 * r0 - a1 * i1
        k1i1 = -(gr1 * r0 + gi1 * i0 - a1 * r1)
        # k2
        tr0 = r0 + 0.5 * dt * k1r0
        ti0 = i0 + 0.5 * dt * k1i0
        tr1 = r1 + 0.5 * dt * k1r1
        ti1 = i1 + 0.5 * dt * k1i1
        k2r0 = a2 * ti0 + gr2 * ti1 + gi2 * tr1
        k2i0 = -(a2 * tr0 + gr2 * tr1 - gi2 * ti1)
        k2r1 = gr2 * ti0 - gi2 * tr0 - a2 * ti1
        k2i1 = -(gr2 * tr0 + gi2 * ti0 - a2 * tr1)
        # k3
        tr0 = r0 + 0.5 * dt * k2r0
        ti0 = i0 + 0.5 * dt * k2i0
        tr1 = r1 + 0.5 * dt * k2r1
        ti1 = i1 + 0.5 * dt * k2i1
        k3r0 = a2 * ti0 + gr2 * ti1 + gi2 * tr1
        k3i0 = -(a2 * tr0 + gr2 * tr1 - gi2 * ti1)
        k3r1 = gr2 * ti0 - gi2 * tr0 - a2 * ti1
        k3i1 = -(gr2 * tr0 + gi2 * ti0 - a2 * tr1)
        # k4
        tr0 = r0 + dt * k3r0
        ti0 = i0 + dt * k3i0
        tr1 = r1 + dt * k3r1
        ti1 = i1 + dt * k3i1
        k4r0 = a4 * ti0 + gr4 * ti1 + gi4 * tr1
        k4i0 = -(a4 * tr0 + gr4 * tr1 - gi4 * ti1)
        k4r1 = gr4 * ti0 - gi4 * tr0 - a4 * ti1
        k4i1 = -(gr4 * tr0 + gi4 * ti0 - a4 * tr1)
        s = dt / 6.0
        r0 += s * (k1r0 + 2.0 * k2r0 + 2.0 * k3r0 + k4r0)
        i0 += s * (k1i0 + 2.0 * k2i0 + 2.0 * k3i0 + k4i0)
        r1 += s * (k1r1 + 2.0 * k2r1 + 2.0 * k3r1 + k4r1)
        i1 += s * (k1i1 + 2.0 * k2i1 + 2.0 * k3i1 + k4i1)
        p = r0 * r0 + i0 * i0
        acc += p
        if record and ((k + 1) % stride == 0 or k == nsteps - 1):
            p_rec[idx] = p
            psi_rec[idx, 0] = r0 + 1j * i0
            psi_rec[idx, 1] = r1 + 1j * i1
            idx += 1
    acc -= 0.5 * p
    norm = r0 * r0 + i0 * i0 + r1 * r1 + i1 * i1
    return acc / nsteps, p, norm


@njit(cache=True)
def lab_schrodinger_traj(delta, amp, carrier, phase, psi0, dt, nsteps, stride):
    nrec = n_records(nsteps, stride)
    p_rec = np.empty(nrec)
    psi_rec = np.empty((nrec, 2), dtype=np.complex128)
    mean, endp, norm = _lab_schrodinger_core(
        0.5 * delta, amp, carrier, phase, dt, nsteps, stride, psi0,
        p_rec, psi_rec, True)
    return p_rec, psi_rec, mean, norm


@njit(cache=True, parallel=True)
def lab_schrodinger_batch(delta, mw_amp, mw_carrier, rf_amp, rf_carrier,
                          rf_phase, dt, nsteps):
    """Two-drive lab-frame batch: per item j the MW carrier, RF carrier
    and RF phase vary; the amplitude vectors are shared."""
    m = mw_carrier.shape[0]
    mean = np.empty(m)
    endp = np.empty(m)
    norm = np.empty(m)
    dummy_p = np.empty(1)
    dummy_psi = np.empty((1, 2), dtype=np.complex128)
    psi0 = np.array([1.0, 0.0, 0.0, 0.0])
    amp = np.empty((2, 3))
    amp[0] = mw_amp
    amp[1] = rf_amp
    for j in prange(m):
        carrier = np.array([mw_carrier[j], rf_carrier[j]])
        phase = np.array([0.0, rf_phase[j]])
        mean[j], endp[j], norm[j] = _lab_schrodinger_core(
            0.5 * delta, amp, carrier, phase, dt, nsteps, nsteps,
            psi0, dummy_p, dummy_psi, False)
    return mean, endp, norm


@njit(cache=True, fastmath=True)
def _rwa_bloch_core(delta, rabi, mod, omega, phi, gamma2, dt, nsteps,
                    stride, r_init, p_rec, r_rec, record):
    rx, ry, rz = r_init[0], r_init[1], r_init[2]
    cp = np.cos(phi)
    sp = np.sin(phi)
    ch = np.cos(omega * dt * 0.5)
    sh = np.sin(omega * dt * 0.5)
    bx = rabi
    p = 0.5 * (1.0 + rz)
    acc = 0.5 * p
    idx = 0
    if record:
        p_rec[0] = p
        r_rec[0, 0] = rx
        r_rec[0, 1] = ry
        r_rec[0, 2] = rz
        idx = 1
    for k in range(nsteps):
        c2 = cp * ch - sp * sh
        s2 = sp * ch + cp * sh
        c4 = c2 * ch - s2 * sh
        s4 = s2 * ch + c2 * sh
        bz1 = delta + 2.0 * mod * cp
        bz2 = delta + 2.0 * mod * c2
        bz4 = delta + 2.0 * mod * c4
        # k1
        k1x = -bz1 * ry - gamma2 * rx
        k1y = bz1 * rx - bx * rz - gamma2 * ry
        k1z = bx * ry
        # k2
        tx = rx + 0.5 * dt * k1x
        ty = ry + 0.5 * dt * k1y
        tz = rz + 0.5 * dt * k1z
        k2x = -bz2 * ty - gamma2 * tx
        k2y = bz2 * tx - bx * tz - gamma2 * ty
        k2z = bx * ty
        # k3
        tx = rx + 0.5 * dt * k2x
        ty = ry + 0.5 * dt * k2y
        tz = rz + 0.5 * dt * k2z
        k3x = -bz2 * ty - gamma2 * tx
        k3y = bz2 * tx - bx * tz - gamma2 * ty
        k3z = bx * ty
        # k4
        tx = rx + dt * k3x
        ty = ry + dt * k3y
        tz = rz + dt * k3z
        k4x = -bz4 * ty - gamma2 * tx
        k4y = bz4 * tx - bx * tz - gamma2 * ty
        k4z = bx * ty
        s = dt / 6.0
        rx += s * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        ry += s * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        rz += s * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
        cp = c4
        sp = s4
        p = 0.5 * (1.0 + rz)
        acc += p
        if record and ((k + 1) % stride == 0 or k == nsteps - 1):
            p_rec[idx] = p
            r_rec[idx, 0] = rx
            r_rec[idx, 1] = ry
            r_rec[idx, 2] = rz
            idx += 1
    acc -= 0.5 * p
    return acc / nsteps, p


@njit(cache=True)
def rwa_bloch_traj(delta, rabi, mod, omega, phi, gamma2, r_init, dt,
                   nsteps, stride):
    nrec = n_records(nsteps, stride)
    p_rec = np.empty(nrec)
    r_rec = np.empty((nrec, 3))
    mean, endp = _rwa_bloch_core(
        delta, rabi, mod, omega, phi, gamma2, dt, nsteps, stride,
        r_init, p_rec, r_rec, True)
    return p_rec, r_rec, mean


@njit(cache=True, parallel=True)
def rwa_bloch_batch(delta, rabi, mod, omega, phi, gamma2, dt, nsteps):
    m = delta.shape[0]
    mean = np.empty(m)
    endp = np.empty(m)
    dummy_p = np.empty(1)
    dummy_r = np.empty((1, 3))
    r_init = np.array([0.0, 0.0, 1.0])
    for j in prange(m):
        mean[j], endp[j] = _rwa_bloch_core(
            delta[j], rabi, mod, omega[j], phi[j], gamma2, dt, nsteps,
            nsteps, r_init, dummy_p, dummy_r, False)
    return mean, endp
