"""Loop-by-loop view of the pumping mechanism for a few pulse widths.

Prints the first loops of the ground-state transfer P21 / P12, the loop at
which the train saturates, and the singlet dwell of one saturated loop.
"""

import argparse

from nvpump import loop_dwell, make_pulse_train, run_schedule, steady_state_iterative


def report(t_s, t_w, show):
    state, n = steady_state_iterative(t_s, t_w)
    res = run_schedule(make_pulse_train(t_s, t_w, n), track_loops=True)
    print(f"t_s = {t_s} ns, t_w = {t_w} ns: saturates after {n} loops at P1 = {state[0]:.6f}")
    print("  loop   P1         P21          P12          P21-P12")
    for r in res.per_loop[:show]:
        print(f"  {r.index:4d}   {r.polarization:.6f}   {r.p21:.4e}   {r.p12:.4e}   {r.net_transfer:+.3e}")
    last = res.per_loop[-1]
    print(f"  last   {last.polarization:.6f}   {last.p21:.4e}   {last.p12:.4e}   {last.net_transfer:+.3e}")
    print(f"  singlet dwell per saturated loop: {loop_dwell(state, t_s, t_w):.4f} ns\n")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--widths", default="4,20,200")
    ap.add_argument("--tw", type=float, default=150.0)
    ap.add_argument("--show", type=int, default=5)
    args = ap.parse_args()
    for t_s in (float(v) for v in args.widths.split(",")):
        report(t_s, args.tw, args.show)
