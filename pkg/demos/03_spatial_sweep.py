"""Sweep the spatial disk diameter and watch the worst case grow.

Each row fixes the attack size k and solves the spatial problem for an
increasing disk D. Footprints nest as D grows, so the worst-case shed is
monotone in D and converges to the unconstrained value once the disk
covers the whole system.

Run:  python demos/03_spatial_sweep.py
"""

from nkshed import AttackerModel, SolveConfig, solve_interdiction, sweep, write_sweep_csv
from nkshed.fixtures import mesh8

net = mesh8()
config = SolveConfig(epsilon=1e-6)

rows = sweep(net, "spatial", k_values=[1, 2], D_values=[50, 70, 90, 120, 200, 500],
             config=config)
write_sweep_csv(rows, "spatial_sweep.csv")
print("wrote spatial_sweep.csv")

print(f"\n{'k':>2} {'D km':>6} {'shed p.u.':>10} {'iters':>6}")
for row in rows:
    print(f"{row['k']:>2} {row['D_km']:>6.0f} {row['eta_star']:>10.4f} "
          f"{row['iterations']:>6}")

for k in (1, 2):
    _, unconstrained, _ = solve_interdiction(net, AttackerModel.traditional(k), config)
    widest = max(r["eta_star"] for r in rows if r["k"] == k)
    print(f"k={k}: widest disk reaches {widest:.4f} vs unconstrained "
          f"{unconstrained:.4f}")
