"""Backward/forward sweep AC power flow on the DistFlow branch equations.

The reference bus holds ``v_ref`` and absorbs whatever active and reactive
power balances the network, so its own injection is an output of the solve.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from .grid import GridState, NetworkModel


class PowerFlowDivergence(RuntimeError):
    def __init__(self, iterations: int, worst_bus: int, delta: float):
        self.iterations, self.worst_bus, self.delta = iterations, worst_bus, delta
        super().__init__(f"power flow did not converge in {iterations} iterations; "
                         f"largest voltage update {delta:.3g} p.u.^2 at bus {worst_bus}")


def run_powerflow(net: NetworkModel, p_inj, q_inj, v_ref: float = 1.0,
                  q_of_v2: Callable[[np.ndarray], np.ndarray] | None = None,
                  max_iter: int = 100, tol: float = 1e-8) -> GridState:
    """Solve one step.

    ``p_inj``/``q_inj`` are per-unit injections ordered as ``net.buses``; the
    entry at the reference bus is ignored (it is solved for).  ``q_of_v2``
    optionally returns extra voltage-dependent reactive injections (capacitor
    banks) given the squared voltages.
    """
    n = net.n_bus
    p_inj = np.asarray(p_inj, dtype=float)
    q_fixed = np.asarray(q_inj, dtype=float)
    nb = len(net.branches)
    r = np.array([b.r for b in net.branches])
    x = np.array([b.x for b in net.branches])
    root = net.index[net.ref_bus]
    v2 = np.full(n, v_ref**2)
    l2 = np.zeros(nb)
    pf = np.zeros(nb)
    qf = np.zeros(nb)
    # branches ordered so that children come before parents in the backward pass
    bfs = [net.branch_into(b) for b in net.order[1:]]
    up = list(reversed(bfs))
    par = np.array([net.index[net.branch_parent[k]] for k in range(nb)])
    chi = np.array([net.index[net.branch_child[k]] for k in range(nb)])
    kids = {k: net.children[net.branch_child[k]] for k in range(nb)}

    for it in range(1, max_iter + 1):
        q_now = q_fixed + (q_of_v2(v2) if q_of_v2 is not None else 0.0)
        for k in up:
            j = chi[k]
            pf[k] = sum(pf[m] for m in kids[k]) - p_inj[j] + r[k] * l2[k]
            qf[k] = sum(qf[m] for m in kids[k]) - q_now[j] + x[k] * l2[k]
        new = v2.copy()
        new[root] = v_ref**2
        for k in bfs:
            i, j = par[k], chi[k]
            new[j] = new[i] - 2 * (r[k] * pf[k] + x[k] * qf[k]) + (r[k] ** 2 + x[k] ** 2) * l2[k]
            if new[j] <= 0:
                raise PowerFlowDivergence(it, net.buses[j].id, float("inf"))
        l2_new = (pf**2 + qf**2) / new[par]
        delta = np.abs(new - v2)
        v2 = new
        change = max(float(delta.max()), float(np.max(np.abs(l2_new - l2), initial=0.0)))
        l2 = l2_new
        if change < tol:
            break
    else:
        worst = int(np.argmax(delta))
        raise PowerFlowDivergence(max_iter, net.buses[worst].id, float(delta[worst]))

    # final consistent pass so all identities hold at the returned point
    q_now = q_fixed + (q_of_v2(v2) if q_of_v2 is not None else 0.0)
    for k in up:
        j = chi[k]
        pf[k] = sum(pf[m] for m in kids[k]) - p_inj[j] + r[k] * l2[k]
        qf[k] = sum(qf[m] for m in kids[k]) - q_now[j] + x[k] * l2[k]
    for k in bfs:
        i, j = par[k], chi[k]
        v2[j] = v2[i] - 2 * (r[k] * pf[k] + x[k] * qf[k]) + (r[k] ** 2 + x[k] ** 2) * l2[k]
    l2 = (pf**2 + qf**2) / v2[par]
    p_out = p_inj.copy()
    q_out = q_now.copy()
    p_out[root] = sum(pf[m] for m in net.children[net.ref_bus]) - 0.0
    q_out[root] = sum(qf[m] for m in net.children[net.ref_bus])
    return GridState(v2=v2, p_flow=pf.copy(), q_flow=qf.copy(), l2=l2, p_inj=p_out, q_inj=q_out,
                     iterations=it)
