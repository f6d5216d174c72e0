"""Pure-Python reference implementation of the grid time-stepping kernel.

Must stay operation-for-operation identical to ``_ckernel.pyx`` so both
backends produce bit-identical results.
"""

from collections import deque
from math import fmod


def simulate(
    seg_length,
    seg_capacity,
    seg_next,
    seg_node,
    seg_axis,
    route_first_seg,
    route_exit_seg,
    route_veh_ptr,
    veh_spawn,
    node_offset,
    win_start,
    win_end,
    cycle,
    speed,
    dt,
    n_steps,
    base_discharge,
    frac_discharge,
    uniforms,
    wait,
    ready,
    exit_time,
):
    """Advance all vehicles through the network; fills ``wait``, ``ready`` and ``exit_time`` in place."""
    seg_length = [float(x) for x in seg_length]
    seg_capacity = [int(x) for x in seg_capacity]
    seg_next = [int(x) for x in seg_next]
    seg_node = [int(x) for x in seg_node]
    seg_axis = [int(x) for x in seg_axis]
    node_offset = [float(x) for x in node_offset]
    win_start = [float(x) for x in win_start]
    win_end = [float(x) for x in win_end]
    spawn = [float(x) for x in veh_spawn]
    w = [float(x) for x in wait]
    rd = [float(x) for x in ready]
    ex = [float(x) for x in exit_time]
    n_routes = len(route_first_seg)
    cycle = float(cycle)
    use_bernoulli = frac_discharge > 0.0

    queues = [deque() for _ in seg_length]
    gate = [int(route_veh_ptr[r]) for r in range(n_routes)]
    gate_end = [int(route_veh_ptr[r + 1]) for r in range(n_routes)]
    last_enter = [-1e300] * n_routes

    for k in range(n_steps):
        t = k * dt
        for r in range(n_routes):
            first = int(route_first_seg[r])
            s = int(route_exit_seg[r]) - 1
            while s >= first:
                q = queues[s]
                if q:
                    tau = fmod(t - node_offset[seg_node[s]], cycle)
                    if tau < 0.0:
                        tau += cycle
                    ax = seg_axis[s]
                    if win_start[ax] <= tau < win_end[ax]:
                        budget = base_discharge
                        if use_bernoulli and uniforms[k, s] < frac_discharge:
                            budget += 1
                        nxt = seg_next[s]
                        to_exit = seg_next[nxt] < 0
                        nq = queues[nxt]
                        while budget > 0 and q:
                            veh = q[0]
                            if rd[veh] > t:
                                break
                            if not to_exit and len(nq) >= seg_capacity[nxt]:
                                break
                            q.popleft()
                            w[veh] += t - rd[veh]
                            if to_exit:
                                ex[veh] = t + seg_length[nxt] / speed
                                rd[veh] = ex[veh]
                            else:
                                nq.append(veh)
                                rd[veh] = t + seg_length[nxt] / speed
                            budget -= 1
                s -= 1

            s0 = first
            q0 = queues[s0]
            while gate[r] < gate_end[r]:
                veh = gate[r]
                if spawn[veh] > t or len(q0) >= seg_capacity[s0]:
                    break
                enter = spawn[veh] if spawn[veh] > t - dt else t
                if enter < last_enter[r]:
                    enter = last_enter[r]
                last_enter[r] = enter
                w[veh] += enter - spawn[veh]
                rd[veh] = enter + seg_length[s0] / speed
                q0.append(veh)
                gate[r] += 1

    wait[:] = w
    ready[:] = rd
    exit_time[:] = ex
