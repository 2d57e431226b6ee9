"""Flat-array simulation kernels.

State layout (length 36)::

    [0:9]   R      row-major      [15:24] Rhat  row-major
    [9:12]  v                     [24:27] vhat
    [12:15] p                     [27:30] phat
                                  [30:33] v_Z
                                  [33:36] p_Z

Every function is compiled with numba when available (see :mod:`._jit`) and
otherwise runs as ordinary numpy code.
"""

import numpy as np

from ._jit import jit

STATE_SIZE = 36

EULER = 0
RK4 = 1

PROFILE_PAPER = 0
PROFILE_SINUSOID = 1

OK = -1


@jit
def hat3(w):
    m = np.zeros((3, 3))
    m[0, 1] = -w[2]
    m[0, 2] = w[1]
    m[1, 0] = w[2]
    m[1, 2] = -w[0]
    m[2, 0] = -w[1]
    m[2, 1] = w[0]
    return m


@jit
def cross3(a, b):
    out = np.empty(3)
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]
    return out


@jit
def polar3(m):
    """Orthogonal polar factor with ``det = +1``; NaN matrix if singular."""
    u, s, vt = np.linalg.svd(m)
    if not (s[2] > 1e-9 * max(s[0], 1.0)):
        return np.full((3, 3), np.nan)
    r = u @ vt
    if np.linalg.det(r) < 0.0:
        for i in range(3):
            u[i, 2] = -u[i, 2]
        r = u @ vt
    return r


@jit
def imu_input(t, r, p, gravity, profile, pp, out):
    """Write ``(omega, accel)`` into ``out[0:6]``.

    ``PROFILE_PAPER`` params: ``omega[3], forward[3], spring`` with
    ``accel = forward - R^T (spring p + g)``.

    ``PROFILE_SINUSOID`` params: ``m`` followed, for each of the six channels,
    by ``bias`` and ``m`` triples ``(amplitude, frequency, phase)``.
    """
    if profile == PROFILE_PAPER:
        for i in range(3):
            out[i] = pp[i]
        q = pp[6] * p + gravity
        rtq = q @ r
        for i in range(3):
            out[3 + i] = pp[3 + i] - rtq[i]
    else:
        m = int(pp[0])
        for ch in range(6):
            base = 1 + ch * (1 + 3 * m)
            val = pp[base]
            for j in range(m):
                k = base + 1 + 3 * j
                val += pp[k] * np.sin(pp[k + 1] * t + pp[k + 2])
            out[ch] = val


@jit
def rhs(t, y, meas, held, gains, gravity, corr_on, profile, pp, dy, u):
    """Coupled system + observer derivative.

    When ``held`` is false the measurement is the stage position ``p``;
    otherwise the sampled value ``meas`` is used.
    """
    r = np.ascontiguousarray(y[0:9]).reshape((3, 3))
    v = y[9:12]
    p = y[12:15]
    rh = np.ascontiguousarray(y[15:24]).reshape((3, 3))
    vh = y[24:27]
    ph = y[27:30]
    vz = y[30:33]
    pz = y[33:36]

    imu_input(t, r, p, gravity, profile, pp, u)
    om = u[0:3]
    acc = u[3:6]
    om_x = hat3(om)

    dr = r @ om_x
    dv = r @ acc + gravity

    if held:
        ym = meas
    else:
        ym = p

    od = np.zeros(3)
    wd1 = np.zeros(3)
    wd2 = np.zeros(3)
    wg1 = np.zeros(3)
    wg2 = np.zeros(3)
    if corr_on:
        c = gains[0]
        lv = gains[1]
        lp = gains[2]
        od = c * cross3(ph - pz, ym - pz)
        rd = ym - ph
        rg = ym - pz
        wd1 = lv * rd
        wd2 = lp * rd
        wg1 = lv * rg
        wg2 = lp * rg

    drh = rh @ om_x + hat3(od) @ rh
    dvh = rh @ acc + gravity + wd1 + cross3(od, vh - vz)
    dph = vh + wd2 + cross3(od, ph - pz)

    for i in range(3):
        for j in range(3):
            dy[3 * i + j] = dr[i, j]
            dy[15 + 3 * i + j] = drh[i, j]
        dy[9 + i] = dv[i]
        dy[12 + i] = v[i]
        dy[24 + i] = dvh[i]
        dy[27 + i] = dph[i]
        dy[30 + i] = gravity[i] + wg1[i]
        dy[33 + i] = vz[i] + wg2[i]


@jit
def project_state(y):
    """Re-orthonormalize both attitude blocks in place."""
    r = polar3(np.ascontiguousarray(y[0:9]).reshape((3, 3)))
    rh = polar3(np.ascontiguousarray(y[15:24]).reshape((3, 3)))
    y[0:9] = r.ravel()
    y[15:24] = rh.ravel()


@jit
def step_state(t, y, dt, method, meas, held, gains, gravity, corr_on, profile, pp):
    """One projected Euler or RK4 step; returns the new state."""
    u = np.empty(6)
    k1 = np.empty(STATE_SIZE)
    rhs(t, y, meas, held, gains, gravity, corr_on, profile, pp, k1, u)
    if method == EULER:
        yn = y + dt * k1
    else:
        k2 = np.empty(STATE_SIZE)
        k3 = np.empty(STATE_SIZE)
        k4 = np.empty(STATE_SIZE)
        h2 = 0.5 * dt
        rhs(t + h2, y + h2 * k1, meas, held, gains, gravity, corr_on, profile, pp, k2, u)
        rhs(t + h2, y + h2 * k2, meas, held, gains, gravity, corr_on, profile, pp, k3, u)
        rhs(t + dt, y + dt * k3, meas, held, gains, gravity, corr_on, profile, pp, k4, u)
        yn = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    project_state(yn)
    return yn


@jit
def integrate(
    y0, t0, dt, n_steps, method, gains, gravity, corr_on, profile, pp,
    noise, decimation, held, states, inputs, meas_out,
):
    """Advance ``n_steps`` and record every state.

    ``states``, ``inputs`` and ``meas_out`` have ``n_steps + 1`` rows and are
    filled in place. Returns ``OK`` or the index of the first divergent step.
    """
    y = y0.copy()
    meas = np.zeros(3)
    u = np.empty(6)
    for k in range(n_steps + 1):
        t = t0 + k * dt
        if k % decimation == 0:
            for i in range(3):
                meas[i] = y[12 + i] + noise[k, i]
        states[k, :] = y
        imu_input(t, np.ascontiguousarray(y[0:9]).reshape((3, 3)), y[12:15],
                  gravity, profile, pp, u)
        inputs[k, :] = u
        meas_out[k, :] = meas
        if k == n_steps:
            break
        y = step_state(t, y, dt, method, meas, held, gains, gravity, corr_on,
                       profile, pp)
        for i in range(STATE_SIZE):
            if not (abs(y[i]) <= 1e12):
                return k + 1
    return OK
