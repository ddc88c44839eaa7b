"""Generate slits from known coefficients, then recover the coefficients."""
import numpy as np

from _common import parser, save
from slitloewner import bangbang, fixtures
from slitloewner.geometry import Slit, SlitSystem
from slitloewner.lmr_oracle import LmrOracle
from slitloewner.loewner import regenerate_traces


def main():
    p = parser(__doc__)
    p.add_argument("--L", type=float, default=0.6)
    p.add_argument("--steps", type=int, default=1024)
    p.add_argument("--max-level", type=int, default=6)
    args = p.parse_args()
    lam = np.array(fixtures.SYNTHETIC_LAMBDA)
    times, xi = fixtures.synthetic_driving(args.L)
    tr = regenerate_traces(lam, times, xi, args.steps)
    oracle = LmrOracle(SlitSystem(tuple(Slit(t) for t in tr.traces)), resolution=args.resolution)
    sol = bangbang.construct(oracle, max_level=args.max_level, min_level=args.max_level)
    out = {"true_lambda": lam.tolist(), "recovered_lambda": list(sol.lam), "levels": sol.trace(),
           "L_true": args.L, "L_recovered": oracle.L,
           "lambda_error": float(np.max(np.abs(sol.lam - lam)))}
    for row in sol.trace():
        print(row)
    print(f"recovered {sol.lam}, error {out['lambda_error']:.2e}, L {oracle.L:.7f}")
    save(args, "synthetic_inverse.json", out)


if __name__ == "__main__":
    main()
