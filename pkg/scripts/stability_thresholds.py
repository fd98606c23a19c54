"""Critical penetration rates and peak log-magnitudes for each topology and MPS.

    python scripts/stability_thresholds.py [--n 1000] [--step 0.1]
"""
import argparse

from mixed_platoon import FrequencyGrid, Scenario, Topology, find_critical_penetration, string_stability

parser = argparse.ArgumentParser()
parser.add_argument("--n", type=int, default=1000)
parser.add_argument("--step", type=float, default=0.1)
args = parser.parse_args()

grid = FrequencyGrid()
rates = [round(0.1 * k, 1) for k in range(1, 6)]
print(f"{'topology':8} {'M':>2}  critical  " + "  ".join(f"L(p={p})" for p in rates))
for m_max in (4, 6, 8):
    for topology in Topology:
        base = Scenario(topology, 0.0, m_max, n=args.n)
        crit = find_critical_penetration(base, grid, args.step)
        peaks = [string_stability(base.with_p(p), grid).peak for p in rates]
        print(f"{topology.value:8} {m_max:2}  {str(crit):8}  " + "  ".join(f"{x:9.4f}" for x in peaks))
