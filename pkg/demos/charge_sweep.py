"""Sweep the charge and classify the potential from the sup-norm trend.

    python demos/charge_sweep.py [potential]

Warm-started sweep over sigma = 5..500 at M=1000 (coarser than the
production grid, so it finishes in a few minutes), then prints the table
and the alpha/beta classification.
"""

import sys

from qball.analysis import FIG2_CHARGES, classify, sweep_charges
from qball.flow import FlowConfig
from qball.grid import make_grid
from qball.potentials import parse_potential

p = parse_potential(sys.argv[1] if len(sys.argv) > 1 else "gamma")
grid = make_grid(2, 40, 1000)

sweep = sweep_charges(p, FIG2_CHARGES, FlowConfig(), grid)
print(f"{'sigma':>6} {'omega':>9} {'Lambda':>9} {'sup':>8} conv")
for row in sweep.rows():
    print(f"{row['sigma']:6g} {row['omega']:9.5f} {row['Lambda']:9.5f} {row['sup_norm']:8.4f} {row['converged']}")

report = classify(p, sweep)
print(report.label)
for key, val in report.evidence.items():
    print(f"  {key}: {val}")
