"""Compare the closed-form Q correction with simulated radii under both disk conventions.

Prints, for several R/r ratios, the Q expression, the exact probability for
radii uniform in a disk of radius R, and Monte Carlo estimates for radius R
and R + r.
"""

import argparse
import math

from locoutage.bounds import GeometryRatio, q_delta
from locoutage.montecarlo import mc_q_oracle


def exact_radius_probability(mu: float) -> float:
    """P{1/s1 + 1/s2 <= mu} for i.i.d. s with density 2s on (0, 1), mu > 2."""
    return (mu**5 - mu**4 - 2 * mu**3 - 6 * mu**2 + 12 * mu - 12 * (mu - 1) * math.log(mu - 1)) / (mu**4 * (mu - 1))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=10_000_000)
    ap.add_argument("--seed", type=int, default=10)
    ap.add_argument("--delta", type=float, default=math.pi / 6)
    args = ap.parse_args()
    print(f"{'R/r':>8} {'mu':>8} {'Q':>10} {'exact(R)':>10} {'mc(R)':>10} {'mc(R+r)':>10} {'stderr':>9}")
    for ratio in (10.0, 30.0, 100.0, 300.0):
        geom = GeometryRatio(ratio, 1.0)
        mu = ratio * math.sin(args.delta)
        q = q_delta(math.pi / 2, args.delta, geom)
        r_est = mc_q_oracle(args.delta, math.pi / 2, geom, "R", args.trials, args.seed)
        rr_est = mc_q_oracle(args.delta, math.pi / 2, geom, "R-plus-r", args.trials, args.seed)
        print(
            f"{ratio:8g} {mu:8.3f} {q:10.6f} {exact_radius_probability(mu):10.6f} "
            f"{r_est.mean:10.6f} {rr_est.mean:10.6f} {r_est.stderr:9.1e}"
        )


if __name__ == "__main__":
    main()
