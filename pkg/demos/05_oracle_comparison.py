"""Compare the two contact-point oracles on the same task.

Both oracles find, at each outer iteration, the surface points most at risk
of penetrating the environment, and add them to the optimization:

* "mvo"   adds each step's deepest point to *every* time step.
* "tamvo" adds points only near the step where they were found (plus small
  spatial perturbations), so the instantiated problem stays smaller.

Smaller index sets mean fewer complementarity constraints and faster inner
solves; the trade-off is that tamvo may need extra outer iterations to
rediscover a point at a different time step.

Run from the repository root:

    python3 demos/05_oracle_comparison.py
"""
import pathlib
import time

from stocs import StocsConfig, load_scenario, solve

ASSETS = pathlib.Path(__file__).resolve().parents[1] / "assets"


def main():
    scen = load_scenario(ASSETS / "box2d_pivot.yaml")
    print(f"scenario: {scen.name}  ({len(scen.cloud.points)} surface points)")
    print(f"{'oracle':8s} {'status':12s} {'outer':>5s} {'pts/step':>9s} "
          f"{'objective':>11s} {'time':>7s}")

    for oracle in ("mvo", "tamvo"):
        t0 = time.time()
        result = solve(scen, StocsConfig(oracle=oracle))
        print(f"{oracle:8s} {result.status:12s} {len(result.stats):5d} "
              f"{result.index_set.mean_count():9.2f} "
              f"{result.objective:11.4g} {time.time() - t0:6.1f}s")


if __name__ == "__main__":
    main()
