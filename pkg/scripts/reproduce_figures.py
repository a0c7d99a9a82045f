"""Regenerate every simulated figure dataset and print a short digest.

    python scripts/reproduce_figures.py [out_dir]
"""

import sys
from pathlib import Path

from nvpump.cli import main
from nvpump.figures import linear_fit, figure_datasets


def digest():
    tables = figure_datasets()
    _, fig2c = tables["fig2c"]
    print("saturated polarization vs pulse width (t_w = 150 ns)")
    for t_s, pol, loops in fig2c:
        print(f"  t_s = {t_s:6.1f} ns   P1 = {pol:.6f}   loops = {loops}")
    _, fig3a = tables["fig3a"]
    print("saturated polarization vs wait time (t_s = 4 ns)")
    for t_w, pol, contrast in fig3a:
        print(f"  t_w = {t_w:6.1f} ns   P1 = {pol:.6f}   contrast = {contrast:.5f}")
    _, fig4c = tables["fig4c"]
    a, b, r2 = linear_fit([d for _, d, _ in fig4c], [p for _, _, p in fig4c])
    print(f"polarization vs per-loop singlet dwell: slope {b:.3e} /ns, R^2 = {r2:.4f}")


if __name__ == "__main__":
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("figures_out")
    code = main(["figures", "--out", str(out)])
    if code == 0:
        print(f"wrote {sorted(p.name for p in out.iterdir())} to {out}/")
        digest()
    sys.exit(code)
