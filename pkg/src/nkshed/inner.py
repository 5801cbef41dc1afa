"""Defender response: minimum load shed under DC power flow for a fixed attack.

``solve_inner`` solves the load-shed LP exactly. ``solve_penalized_inner``
solves the penalty reformulation in which the flow/angle coupling and the
thermal pinning of interdicted lines are dropped from the constraints and
charged in the objective instead, at per-line penalty rates taken from a
:class:`~nkshed.bounds.DualBounds`. With rates that dominate the optimal
duals the two values coincide, which is the property the cutting-plane
master relies on.

Sign conventions: every line constraint is kept in ``>=`` canonical form so
all four dual families (two for the flow/angle coupling, two for the thermal
pair) are nonnegative at the optimum.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .backend import Model, BackendError
from .netmodel import AttackerModel, Network

if TYPE_CHECKING:  # pragma: no cover
    from .bounds import DualBounds

__all__ = ["AttackPlan", "InnerSolution", "solve_inner", "solve_penalized_inner", "cut_rhs"]

# Interdicted-line coupling rows must be slack by at least this much for the
# zero-dual property of those rows to be trusted.
BIG_M_SLACK_MIN = 1e-4
_MAX_M_DOUBLINGS = 10


@dataclass(frozen=True)
class AttackPlan:
    """A concrete set of interdicted line ids, optionally tied to an attacker model."""

    lines: frozenset[int]
    center_bus: int | None = None
    model: AttackerModel | None = None

    def __post_init__(self):
        object.__setattr__(self, "lines", frozenset(self.lines))
        m = self.model
        if m is None:
            if self.center_bus is not None:
                raise ValueError("center_bus requires a spatial model")
            return
        if m.variant == "spatial":
            if len(self.lines) > m.k:
                raise ValueError(f"spatial plan has {len(self.lines)} lines > k = {m.k}")
            if self.center_bus is None:
                raise ValueError("spatial plan requires a center bus")
        else:
            if self.center_bus is not None:
                raise ValueError("center_bus requires a spatial model")
            if len(self.lines) != m.k:
                raise ValueError(
                    f"{m.variant} plan must have exactly k = {m.k} lines, got {len(self.lines)}")

    @staticmethod
    def of(lines, center_bus: int | None = None, model: AttackerModel | None = None) -> "AttackPlan":
        return AttackPlan(frozenset(int(l) for l in lines), center_bus, model)

    def sorted_lines(self) -> tuple[int, ...]:
        return tuple(sorted(self.lines))


@dataclass
class InnerSolution:
    """Optimal defender response to one attack."""

    eta: float
    shed: dict[int, float]
    flow: dict[int, float]
    gen: dict[int, float]
    angle: dict[int, float]
    duals_mu: dict[int, tuple[float, float]]
    duals_pi: dict[int, tuple[float, float]]
    status: str
    attack: AttackPlan
    big_m_used: float
    big_m_ok: bool = True

    def flow_pos(self, line_id: int) -> float:
        return max(self.flow[line_id], 0.0)

    def flow_neg(self, line_id: int) -> float:
        return max(-self.flow[line_id], 0.0)


def _check_attack_lines(net: Network, attack: AttackPlan) -> np.ndarray:
    """Return the 0/1 interdiction vector in line-position order."""
    x = np.zeros(len(net.lines))
    for lid in attack.lines:
        if lid not in net.line_pos:
            raise ValueError(f"attack references unknown line id {lid}")
        x[net.line_pos[lid]] = 1.0
    return x


def _surviving_islands(net: Network, x: np.ndarray) -> np.ndarray:
    """Island label per bus position under the surviving lines."""
    n = len(net.buses)
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    fr, to = net.endpoint_positions()
    for e in range(len(net.lines)):
        if x[e] < 0.5:
            parent[find(fr[e])] = find(to[e])
    return np.array([find(i) for i in range(n)])


def _canonicalize_angles(net: Network, x: np.ndarray, flow: np.ndarray,
                         ang: np.ndarray, big_m: float) -> np.ndarray:
    """Exploit the per-island angle freedom to slacken interdicted couplings.

    Angles are only determined up to a constant per island of the surviving
    network. Shifting those constants leaves every surviving line's coupling
    untouched and rescales nothing else, so we pick the shifts that minimize
    the coupling magnitudes of interdicted lines that straddle islands.
    Without this, a vertex solution routinely parks such rows exactly on the
    +-M bound and the slack diagnostic would cry wolf.
    """
    island = _surviving_islands(net, x)
    fr, to = net.endpoint_positions()
    b = net.susceptance_vector()
    inter = [e for e in range(len(net.lines))
             if x[e] > 0.5 and island[fr[e]] != island[to[e]]]
    if not inter:
        return ang
    roots = sorted({island[fr[e]] for e in inter} | {island[to[e]] for e in inter})
    col = {r: i for i, r in enumerate(roots)}
    mdl = Model("angle-canonicalization")
    c = mdl.add_vars(len(roots), lb=-np.inf, ub=np.inf)
    u = mdl.add_vars(len(inter), lb=0.0, ub=big_m, obj=1.0)
    for slot, e in enumerate(inter):
        base = flow[e] + b[e] * (ang[fr[e]] - ang[to[e]])
        cu, cv = c[col[island[fr[e]]]], c[col[island[to[e]]]]
        # -u <= base + b*(c_u - c_v) <= u
        mdl.add_ge([u[slot], cu, cv], [1.0, b[e], -b[e]], -base)
        mdl.add_ge([u[slot], cu, cv], [1.0, -b[e], b[e]], base)
    sol = mdl.solve_lp()
    shift = np.zeros(len(net.buses))
    for r, i in col.items():
        shift[island == r] = sol.x[c[i]]
    return ang + shift


def _build_inner_lp(net: Network, x: np.ndarray, big_m: float) -> tuple[Model, dict]:
    n, m = len(net.buses), len(net.lines)
    demand = net.demand_vector()
    cap = net.gen_cap_vector()
    b = net.susceptance_vector()
    t = net.thermal_vector()
    fr, to = net.endpoint_positions()

    mdl = Model("load-shed")
    v_shed = mdl.add_vars(n, lb=0.0, ub=1.0, obj=demand)
    v_gen = mdl.add_vars(n, lb=0.0, ub=cap)
    v_ang = mdl.add_vars(n, lb=-np.inf, ub=np.inf)
    v_flow = mdl.add_vars(m, lb=-np.inf, ub=np.inf)

    # Flow balance: gen + demand*shed - outflow + inflow = demand.
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

    rows = {"mu1": [], "mu2": [], "pi1": [], "pi2": []}
    for e in range(m):
        couple_cols = [v_flow[e], v_ang[fr[e]], v_ang[to[e]]]
        couple_vals = [1.0, b[e], -b[e]]
        rows["mu1"].append(mdl.add_ge(couple_cols, couple_vals, -big_m * x[e]))
        rows["mu2"].append(mdl.add_ge(couple_cols, [-v for v in couple_vals], -big_m * x[e]))
        cap_e = t[e] * (1.0 - x[e])
        rows["pi1"].append(mdl.add_ge([v_flow[e]], [1.0], -cap_e))
        rows["pi2"].append(mdl.add_ge([v_flow[e]], [-1.0], -cap_e))

    layout = {"shed": v_shed, "gen": v_gen, "ang": v_ang, "flow": v_flow, "rows": rows}
    return mdl, layout


def solve_inner(net: Network, attack: AttackPlan, big_m: float | None = None) -> InnerSolution:
    """Minimum load shed with the attacked lines removed.

    Always feasible (the operator can shed everything), so the result is
    optimal or an exception is raised. After solving, the relaxed coupling
    rows of every interdicted line are checked for slack; if any is within
    ``BIG_M_SLACK_MIN`` of binding, the big-M is doubled and the LP re-solved
    (at most 10 doublings) so the zero-dual property of those rows holds.
    """
    x = _check_attack_lines(net, attack)
    m_val = float(big_m if big_m is not None else net.big_M)
    interdicted = [e for e in range(len(net.lines)) if x[e] > 0.5]

    for attempt in range(_MAX_M_DOUBLINGS + 1):
        mdl, layout = _build_inner_lp(net, x, m_val)
        try:
            sol = mdl.solve_lp()
        except BackendError as err:
            raise BackendError(f"inner solve failed for attack {sorted(attack.lines)}: {err}") from err
        b = net.susceptance_vector()
        fr, to = net.endpoint_positions()
        flow = sol.x[layout["flow"]]
        ang = _canonicalize_angles(net, x, flow, sol.x[layout["ang"]], m_val)
        couple = flow + b * (ang[fr] - ang[to])
        ok = all(
            couple[e] + m_val >= BIG_M_SLACK_MIN and m_val - couple[e] >= BIG_M_SLACK_MIN
            for e in interdicted
        )
        if ok or attempt == _MAX_M_DOUBLINGS:
            if not ok:
                warnings.warn(
                    f"big-M slack below {BIG_M_SLACK_MIN} after {_MAX_M_DOUBLINGS} doublings; "
                    "interdicted-line duals may be unreliable",
                    RuntimeWarning,
                )
            break
        m_val *= 2.0

    shed = sol.x[layout["shed"]]
    rows = layout["rows"]
    duals_mu = {}
    duals_pi = {}
    for e, line in enumerate(net.lines):
        duals_mu[line.id] = (float(sol.dual_ge[rows["mu1"][e]]), float(sol.dual_ge[rows["mu2"][e]]))
        duals_pi[line.id] = (float(sol.dual_ge[rows["pi1"][e]]), float(sol.dual_ge[rows["pi2"][e]]))
    return InnerSolution(
        eta=float(sol.objective),
        shed={bus.id: float(shed[i]) for i, bus in enumerate(net.buses)},
        flow={line.id: float(flow[e]) for e, line in enumerate(net.lines)},
        gen={bus.id: float(sol.x[layout["gen"][i]]) for i, bus in enumerate(net.buses)},
        angle={bus.id: float(ang[i]) for i, bus in enumerate(net.buses)},
        duals_mu=duals_mu,
        duals_pi=duals_pi,
        status=sol.status,
        attack=attack,
        big_m_used=m_val,
        big_m_ok=bool(ok),
    )


def solve_penalized_inner(net: Network, attack: AttackPlan, bounds: "DualBounds",
                          big_m: float | None = None) -> float:
    """Optimal value of the penalty reformulation of the load-shed LP.

    Surviving lines keep their flow/angle coupling as a hard equality and
    their thermal limit as a hard range. For interdicted lines the coupling
    is relaxed to a +-M band (their coupling penalty rate is zero: those
    rows carry zero duals once M is large enough) and the flow, split into
    nonnegative positive/negative parts, is charged in the objective at the
    line's thermal-dual upper bounds instead of being pinned to zero.
    """
    x = _check_attack_lines(net, attack)
    for lid in attack.lines:
        for rate in bounds.line(lid):
            if not np.isfinite(rate) or rate < 0:
                raise ValueError(f"penalty rate for line {lid} must be finite and >= 0")

    n, m = len(net.buses), len(net.lines)
    demand = net.demand_vector()
    b = net.susceptance_vector()
    t = net.thermal_vector()
    fr, to = net.endpoint_positions()
    m_val = float(big_m if big_m is not None else net.big_M)

    mdl = Model("load-shed-penalized")
    v_shed = mdl.add_vars(n, lb=0.0, ub=1.0, obj=demand)
    v_gen = mdl.add_vars(n, lb=0.0, ub=net.gen_cap_vector())
    v_ang = mdl.add_vars(n, lb=-np.inf, ub=np.inf)
    v_flow = mdl.add_vars(m, lb=-t, ub=t)

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

    for e, line in enumerate(net.lines):
        couple_cols = [v_flow[e], v_ang[fr[e]], v_ang[to[e]]]
        couple_vals = [1.0, b[e], -b[e]]
        if x[e] > 0.5:
            mdl.add_ge(couple_cols, couple_vals, -m_val)
            mdl.add_ge(couple_cols, [-v for v in couple_vals], -m_val)
            pi1, pi2 = bounds.line(line.id)[2], bounds.line(line.id)[3]
            s_pos = mdl.add_var(lb=0.0, obj=pi2)
            s_neg = mdl.add_var(lb=0.0, obj=pi1)
            mdl.add_eq([v_flow[e], s_pos, s_neg], [1.0, -1.0, 1.0], 0.0)
        else:
            mdl.add_eq(couple_cols, couple_vals, 0.0)

    sol = mdl.solve_lp()
    return float(sol.objective)


def cut_rhs(sol: InnerSolution, bounds: "DualBounds", candidate: AttackPlan) -> float:
    """Upper bound on the shed of ``candidate`` implied by the solved attack.

    Each candidate line contributes its flow at the solved operating point,
    negative part priced at the line's first thermal-dual bound and positive
    part at the second.
    """
    value = sol.eta
    for lid in candidate.lines:
        _, _, pi1, pi2 = bounds.line(lid)
        value += pi1 * sol.flow_neg(lid) + pi2 * sol.flow_pos(lid)
    return float(value)
