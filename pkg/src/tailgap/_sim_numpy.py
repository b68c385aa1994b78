"""Pure-numpy simulation kernel (fallback when the compiled core is absent).

Both kernels consume the Generator's bit stream with the exact same draw
discipline per step, so their outputs are bit-identical:

    1. n standard normals (growth shocks, storage order)
    2. n uniforms (exit thinning; drawn even when h == 0)
    3. one Poisson(nu*dt) (entry count; consumes nothing when nu == 0)
    4. one uniform (shedding trigger; drawn even when lambda == 0, which
       keeps the stream common across shedding-rate candidates)

The growth update is kept as two separately rounded operations
(t = drift + sig*z; x += t) to match the compiled kernel, which is built
with FMA contraction disabled.
"""

from __future__ import annotations

import math

import numpy as np


def run_kernel(rng: np.random.Generator, log_s0: np.ndarray, n_steps: int,
               drift_dt: float, sig_sqdt: float, h_dt: float, nu_dt: float,
               lam_dt: float, epsilon: float, log_entry: float):
    """Advance the population ``n_steps`` steps; returns
    (final log sizes, shed_total, n_entries, n_exits, n_sheds, extinct_step).

    ``extinct_step`` is -1 normally, or the step index at which the
    population hit zero (the kernel stops there).
    """
    log_s = np.array(log_s0, dtype=float, copy=True)
    shed_total = 0.0
    n_entries = 0
    n_exits = 0
    n_sheds = 0

    for step in range(n_steps):
        n = log_s.size
        # (i) geometric growth of every living firm
        z = rng.standard_normal(n)
        log_s += drift_dt + sig_sqdt * z
        # (ii) exit by Bernoulli thinning, order-preserving compaction
        u = rng.random(n)
        keep = u >= h_dt
        kept = int(keep.sum())
        if kept < n:
            n_exits += n - kept
            log_s = log_s[keep]
        # (iii) entries at unit size (log_entry)
        m_new = int(rng.poisson(nu_dt))
        if m_new:
            n_entries += m_new
            log_s = np.concatenate([log_s, np.full(m_new, log_entry)])
        if log_s.size == 0:
            return log_s, shed_total, n_entries, n_exits, n_sheds, step
        # (iv) shedding: the largest firm keeps (1-epsilon) of its size
        u_shed = rng.random()
        if u_shed < lam_dt:
            i = int(np.argmax(log_s))
            s_before = math.exp(float(log_s[i]))
            s_after = s_before * (1.0 - epsilon)
            log_s[i] = math.log(s_after)
            shed_total += s_before - s_after
            n_sheds += 1

    return log_s, shed_total, n_entries, n_exits, n_sheds, -1
