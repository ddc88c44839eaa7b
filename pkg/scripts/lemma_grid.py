"""lmr grid, monotonicity and difference-quotient ratios on a two-slit fixture."""
import numpy as np

from _common import parser, save
from slitloewner import fixtures
from slitloewner.lmr_oracle import LmrOracle, lemma_ratio, monotone_differences, random_quadruples


def main():
    p = parser(__doc__)
    p.add_argument("--fixture", default="asymmetric")
    p.add_argument("--grid", type=int, default=33)
    p.add_argument("--samples", type=int, default=1000)
    args = p.parse_args()
    oracle = LmrOracle(fixtures.get(args.fixture), resolution=args.resolution)
    f = np.linspace(0, 1, args.grid)
    G = oracle.grid(f, f)
    d0, d1 = monotone_differences(G)
    out = {"fixture": args.fixture, "grid": args.grid, "min_difference": [d0, d1], "moduli": {}}
    rng = np.random.default_rng(0)
    for eps in (1.0, 0.5, 0.25, 0.1):
        delta, dev = oracle.continuity_modulus(eps)
        r = [lemma_ratio(oracle, q) for q in random_quadruples(rng, delta, args.samples)]
        out["moduli"][str(eps)] = {"delta": delta, "grid_deviation": dev,
                                   "sampled_min": min(r), "sampled_max": max(r)}
        print(f"eps={eps}: delta={delta:.4f}, sampled ratios [{min(r):.4f}, {max(r):.4f}]")
    out["lmr"] = G.tolist()
    save(args, f"lemma_grid_{args.fixture}.json", out)


if __name__ == "__main__":
    main()
