"""Upper bounds on the optimal thermal duals across all feasible attacks.

The cutting-plane cuts price each interdicted line's flow at a per-line
rate. For the cuts to never undercut the true shed of any feasible attack,
the rates must dominate the optimal duals of the interdicted-line thermal
rows over the whole feasible set.

Two modes are provided. ``heuristic_bounds`` prices every line at 1.0: the
shed caused by removing a line is then assumed to be at most the flow it
carried, which is exact for pure transportation networks but can undershoot
on meshed networks (Braess-style reroutes), so heuristic runs should be
certified afterwards. ``valid_bounds`` prices every line at the total
system load, a safe ceiling, except for lines the relaxation LPs prove can
never carry flow in either direction; those are priced at zero.

A note on the zero-pricing test: pruning a line merely because the
relaxation shows it is never *congested* (max |flow| strictly below its
thermal rating) is not sound here. The relevant duals are those of the
interdicted state, where the thermal pair pins the flow to zero and its
multiplier is the marginal value of restoring a unit of flow; that value
can be positive on an uncongested line whose rating is simply generous
(e.g. a rating of 10 on a line that carries 2 but whose loss strands load).
The relaxation can only certify a zero rate in a direction the line can
never use at all, which is the test applied below.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .attackers import MasterEncoding
from .backend import Model
from .netmodel import Network, total_load

__all__ = ["DualBounds", "heuristic_bounds", "valid_bounds"]

VALID = "valid"
HEURISTIC = "heuristic"

# LP values at or below this are treated as exactly zero when classifying
# whether a line can ever carry flow in a direction.
FLOW_DEAD_TOL = 1e-6


@dataclass(frozen=True)
class DualBounds:
    """Per-line penalty rates: coupling pair (always zero) and thermal pair."""

    pi1: dict[int, float]
    pi2: dict[int, float]
    mu1: dict[int, float]
    mu2: dict[int, float]
    mode: str
    # Directional flow extremes (max reverse, max forward) from the valid-mode
    # relaxation LPs; empty in heuristic mode. Diagnostic only.
    flow_range: dict[int, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        for name, entries in (("pi1", self.pi1), ("pi2", self.pi2),
                              ("mu1", self.mu1), ("mu2", self.mu2)):
            for lid, v in entries.items():
                if v < 0:
                    raise ValueError(f"{name}[{lid}] must be >= 0, got {v}")
        for entries in (self.mu1, self.mu2):
            if any(v != 0.0 for v in entries.values()):
                raise ValueError("coupling-row bounds are fixed to zero")

    def line(self, line_id: int) -> tuple[float, float, float, float]:
        return (self.mu1[line_id], self.mu2[line_id],
                self.pi1[line_id], self.pi2[line_id])


def heuristic_bounds(net: Network) -> DualBounds:
    """Unit rates for every line; fast, not guaranteed, certify afterwards."""
    ids = net.line_ids()
    one = {lid: 1.0 for lid in ids}
    zero = {lid: 0.0 for lid in ids}
    return DualBounds(pi1=dict(one), pi2=dict(one), mu1=dict(zero), mu2=dict(zero),
                      mode=HEURISTIC)


def _flow_extreme_lp(net: Network, encoding: MasterEncoding, line_pos: int,
                     sign: float) -> float:
    """max sign * flow(line) over the relaxed attack polytope and DC physics.

    The attack variables are relaxed to [0, 1] with the feasible-set rows
    kept. Every other line keeps its interdiction-dependent coupling and
    thermal rows; the probed line is left at full strength with its coupling
    relaxed to the +-M band, so the extreme covers both its surviving and
    interdicted operating ranges.
    """
    n, m = len(net.buses), len(net.lines)
    demand = net.demand_vector()
    b = net.susceptance_vector()
    t = net.thermal_vector()
    fr, to = net.endpoint_positions()
    big_m = net.big_M

    mdl = Model(f"flow-extreme-{net.lines[line_pos].id}")
    # Feasible-set columns first (binaries relaxed), mirroring encoding order.
    mdl.add_vars(encoding.num_vars, lb=encoding.lb, ub=encoding.ub)
    for cols, vals, lo, hi in encoding.rows:
        if lo == hi:
            mdl.add_eq(cols, vals, lo)
        else:
            if np.isfinite(lo):
                mdl.add_ge(cols, vals, lo)
            if np.isfinite(hi):
                mdl.add_le(cols, vals, hi)
    x = encoding.blocks["x"]

    v_shed = mdl.add_vars(n, lb=0.0, ub=1.0)
    v_gen = mdl.add_vars(n, lb=0.0, ub=net.gen_cap_vector())
    v_ang = mdl.add_vars(n, lb=-np.inf, ub=np.inf)
    v_flow = mdl.add_vars(m, lb=-np.inf, ub=np.inf)

    for i in range(n):
        cols = [v_gen[i], v_shed[i]]
        vals = [1.0, demand[i]]
        for lid in net.adjacency[net.buses[i].id][0]:
            cols.append(v_flow[net.line_pos[lid]])
            vals.append(-1.0)
        for lid in net.adjacency[net.buses[i].id][1]:
            cols.append(v_flow[net.line_pos[lid]])
            vals.append(1.0)
        mdl.add_eq(cols, vals, demand[i])

    for e in range(m):
        couple_cols = [v_flow[e], v_ang[fr[e]], v_ang[to[e]]]
        couple_vals = [1.0, b[e], -b[e]]
        if e == line_pos:
            mdl.add_ge(couple_cols, couple_vals, -big_m)
            mdl.add_ge(couple_cols, [-v for v in couple_vals], -big_m)
            mdl.add_ge([v_flow[e]], [1.0], -t[e])
            mdl.add_ge([v_flow[e]], [-1.0], -t[e])
        else:
            # Coupling relaxes and thermal shrinks as the line's x grows.
            mdl.add_ge(couple_cols + [x[e]], couple_vals + [big_m], 0.0)
            mdl.add_ge(couple_cols + [x[e]], [-v for v in couple_vals] + [big_m], 0.0)
            mdl.add_ge([v_flow[e], x[e]], [1.0, -t[e]], -t[e])
            mdl.add_ge([v_flow[e], x[e]], [-1.0, -t[e]], -t[e])

    mdl.set_objective_coef(int(v_flow[line_pos]), -sign)  # min -sign*p == max sign*p
    sol = mdl.solve_lp()
    return float(-sol.objective)


def valid_bounds(net: Network, encoding: MasterEncoding) -> DualBounds:
    """Certified rates: total load everywhere except provably flow-dead directions.

    For each line the pair of relaxation LPs ``max +-flow`` is solved over
    the relaxed feasible set. A line whose flow can never leave zero in
    either direction can never matter to any attack and is priced at zero;
    every other line is priced at the total load, the conservative ceiling
    on any load-shed dual.
    """
    load = total_load(net)
    pi1: dict[int, float] = {}
    pi2: dict[int, float] = {}
    rng: dict[int, tuple[float, float]] = {}
    for e, line in enumerate(net.lines):
        fwd = _flow_extreme_lp(net, encoding, e, +1.0)
        rev = _flow_extreme_lp(net, encoding, e, -1.0)
        rng[line.id] = (rev, fwd)
        dead = fwd <= FLOW_DEAD_TOL and rev <= FLOW_DEAD_TOL
        pi1[line.id] = 0.0 if dead else load
        pi2[line.id] = 0.0 if dead else load
    zero = {lid: 0.0 for lid in net.line_ids()}
    return DualBounds(pi1=pi1, pi2=pi2, mu1=dict(zero), mu2=dict(zero),
                      mode=VALID, flow_range=rng)
