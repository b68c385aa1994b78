#cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernel.

Bit-compatible with the numpy fallback: identical draw discipline against
the same BitGenerator (see _sim_numpy for the per-step contract), scalar
libm exp/log at shedding events, and FMA contraction disabled at compile
time so the growth update rounds exactly like numpy's two-pass ufuncs.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport exp, log
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (
    random_poisson,
    random_standard_normal,
    random_standard_uniform,
)

import numpy as np


def run_kernel(rng, log_s0, Py_ssize_t n_steps, double drift_dt,
               double sig_sqdt, double h_dt, double nu_dt, double lam_dt,
               double epsilon, double log_entry):
    """Same signature and return contract as _sim_numpy.run_kernel."""
    cdef const char *capsule_name = "BitGenerator"
    bit_generator = rng.bit_generator
    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, capsule_name):
        raise ValueError("invalid BitGenerator capsule")
    cdef bitgen_t *state = <bitgen_t *> PyCapsule_GetPointer(capsule, capsule_name)

    cdef Py_ssize_t n = len(log_s0)
    cdef Py_ssize_t cap = n + <Py_ssize_t> (nu_dt * n_steps + 6.0 * (nu_dt * n_steps + 1.0) ** 0.5) + 64
    buf_arr = np.empty(cap, dtype=np.float64)
    buf_arr[:n] = np.asarray(log_s0, dtype=np.float64)
    cdef double[::1] buf = buf_arr

    cdef double shed_total = 0.0
    cdef long long n_entries = 0, n_exits = 0, n_sheds = 0
    cdef Py_ssize_t step, i, w, j, imax, m_new
    cdef double z, u, t, best, s_before, s_after
    cdef Py_ssize_t extinct_step = -1

    with bit_generator.lock:
        for step in range(n_steps):
            # (i) growth
            for i in range(n):
                z = random_standard_normal(state)
                t = drift_dt + sig_sqdt * z
                buf[i] = buf[i] + t
            # (ii) exits (stable compaction; one uniform per firm always)
            w = 0
            for i in range(n):
                u = random_standard_uniform(state)
                if u >= h_dt:
                    buf[w] = buf[i]
                    w += 1
                else:
                    n_exits += 1
            n = w
            # (iii) entries
            m_new = <Py_ssize_t> random_poisson(state, nu_dt)
            if m_new > 0:
                n_entries += m_new
                if n + m_new > cap:
                    cap = 2 * cap if 2 * cap > n + m_new + 64 else n + m_new + 64
                    new_arr = np.empty(cap, dtype=np.float64)
                    new_arr[:n] = buf_arr[:n]
                    buf_arr = new_arr
                    buf = buf_arr
                for j in range(m_new):
                    buf[n + j] = log_entry
                n += m_new
            if n == 0:
                extinct_step = step
                break
            # (iv) shedding of the current largest firm (first max on ties)
            u = random_standard_uniform(state)
            if u < lam_dt:
                imax = 0
                best = buf[0]
                for i in range(1, n):
                    if buf[i] > best:
                        best = buf[i]
                        imax = i
                s_before = exp(buf[imax])
                s_after = s_before * (1.0 - epsilon)
                buf[imax] = log(s_after)
                shed_total += s_before - s_after
                n_sheds += 1

    out = buf_arr[:n].copy()
    return out, shed_total, int(n_entries), int(n_exits), int(n_sheds), int(extinct_step)
