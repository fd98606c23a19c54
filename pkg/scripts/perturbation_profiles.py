"""Per-vehicle peak velocity deviation for the 10% / 20% penetration runs at M=6.

Prints head/tail decile means per topology; pass --plot to save a figure
(requires matplotlib).

    python scripts/perturbation_profiles.py [--seeds 10] [--plot profiles.png]
"""
import argparse

import numpy as np

from mixed_platoon import SimConfig, Topology, run
from mixed_platoon.metrics import peak_deviation_profile

parser = argparse.ArgumentParser()
parser.add_argument("--seeds", type=int, default=10)
parser.add_argument("--m-max", type=int, default=6)
parser.add_argument("--plot")
args = parser.parse_args()

profiles = {}
for p in (0.1, 0.2):
    for topology in Topology:
        pk = np.mean(
            [peak_deviation_profile(run(SimConfig(topology=topology, p=p, m_max=args.m_max, seed=s)))[1:]
             for s in range(args.seeds)],
            axis=0,
        )
        profiles[topology, p] = pk
        print(f"{topology.value:5} p={p:.1f}  first decile {pk[:10].mean():.3f}  last decile {pk[-10:].mean():.3f}  "
              f"max {pk.max():.3f} m/s")

if args.plot:
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    for ax, p in zip(axes, (0.1, 0.2)):
        for topology in Topology:
            ax.plot(np.arange(1, len(profiles[topology, p]) + 1), profiles[topology, p], label=topology.value)
        ax.axhline(3.0, color="k", lw=0.5, ls="--")
        ax.set_title(f"p = {p:.0%}, M = {args.m_max}")
        ax.set_xlabel("vehicle index")
    axes[0].set_ylabel("peak |v - v*| (m/s)")
    axes[0].legend()
    fig.tight_layout()
    fig.savefig(args.plot, dpi=150)
