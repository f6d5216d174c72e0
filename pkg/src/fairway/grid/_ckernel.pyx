# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled grid time-stepping kernel; mirrors ``_pykernel.simulate`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fmod

cnp.import_array()


def simulate(
    const double[::1] seg_length,
    const cnp.int64_t[::1] seg_capacity,
    const cnp.int64_t[::1] seg_next,
    const cnp.int64_t[::1] seg_node,
    const cnp.int64_t[::1] seg_axis,
    const cnp.int64_t[::1] route_first_seg,
    const cnp.int64_t[::1] route_exit_seg,
    const cnp.int64_t[::1] route_veh_ptr,
    const double[::1] veh_spawn,
    const double[::1] node_offset,
    const double[::1] win_start,
    const double[::1] win_end,
    double cycle,
    double speed,
    double dt,
    Py_ssize_t n_steps,
    cnp.int64_t base_discharge,
    double frac_discharge,
    const double[:, ::1] uniforms,
    double[::1] wait,
    double[::1] ready,
    double[::1] exit_time,
):
    cdef Py_ssize_t n_seg = seg_length.shape[0]
    cdef Py_ssize_t n_routes = route_first_seg.shape[0]
    cdef Py_ssize_t s, r, k, nxt, first, s0, ax, veh, total_buf = 0, slot
    cdef double t, tau, enter
    cdef cnp.int64_t budget
    cdef bint to_exit, use_bernoulli = frac_discharge > 0.0

    # ring buffer per signalized segment; exit segments are never buffered
    cdef cnp.int64_t[::1] buf_off = np.zeros(n_seg, dtype=np.int64)
    cdef cnp.int64_t[::1] buf_cap = np.zeros(n_seg, dtype=np.int64)
    for s in range(n_seg):
        buf_off[s] = total_buf
        if seg_next[s] >= 0:
            buf_cap[s] = seg_capacity[s]
            total_buf += seg_capacity[s]
    cdef cnp.int64_t[::1] buf = np.zeros(max(total_buf, 1), dtype=np.int64)
    cdef cnp.int64_t[::1] head = np.zeros(n_seg, dtype=np.int64)
    cdef cnp.int64_t[::1] count = np.zeros(n_seg, dtype=np.int64)
    cdef cnp.int64_t[::1] gate = np.empty(n_routes, dtype=np.int64)
    cdef double[::1] last_enter = np.full(n_routes, -1e300)
    for r in range(n_routes):
        gate[r] = route_veh_ptr[r]

    with nogil:
        for k in range(n_steps):
            t = k * dt
            for r in range(n_routes):
                first = route_first_seg[r]
                s = route_exit_seg[r] - 1
                while s >= first:
                    if count[s] > 0:
                        tau = fmod(t - node_offset[seg_node[s]], cycle)
                        if tau < 0.0:
                            tau += cycle
                        ax = seg_axis[s]
                        if win_start[ax] <= tau and tau < win_end[ax]:
                            budget = base_discharge
                            if use_bernoulli and uniforms[k, s] < frac_discharge:
                                budget += 1
                            nxt = seg_next[s]
                            to_exit = seg_next[nxt] < 0
                            while budget > 0 and count[s] > 0:
                                veh = buf[buf_off[s] + head[s]]
                                if ready[veh] > t:
                                    break
                                if not to_exit and count[nxt] >= seg_capacity[nxt]:
                                    break
                                head[s] = (head[s] + 1) % buf_cap[s]
                                count[s] -= 1
                                wait[veh] += t - ready[veh]
                                if to_exit:
                                    exit_time[veh] = t + seg_length[nxt] / speed
                                    ready[veh] = exit_time[veh]
                                else:
                                    slot = (head[nxt] + count[nxt]) % buf_cap[nxt]
                                    buf[buf_off[nxt] + slot] = veh
                                    count[nxt] += 1
                                    ready[veh] = t + seg_length[nxt] / speed
                                budget -= 1
                    s -= 1

                s0 = first
                while gate[r] < route_veh_ptr[r + 1]:
                    veh = gate[r]
                    if veh_spawn[veh] > t or count[s0] >= seg_capacity[s0]:
                        break
                    if veh_spawn[veh] > t - dt:
                        enter = veh_spawn[veh]
                    else:
                        enter = t
                    if enter < last_enter[r]:
                        enter = last_enter[r]
                    last_enter[r] = enter
                    wait[veh] += enter - veh_spawn[veh]
                    ready[veh] = enter + seg_length[s0] / speed
                    slot = (head[s0] + count[s0]) % buf_cap[s0]
                    buf[buf_off[s0] + slot] = veh
                    count[s0] += 1
                    gate[r] += 1
