"""Bang-bang construction on every fixture: lambda per level and normalization."""
import time

from _common import parser, save
from slitloewner import bangbang, fixtures
from slitloewner.lmr_oracle import LmrOracle


def main():
    p = parser(__doc__)
    p.add_argument("--max-level", type=int, default=6)
    p.add_argument("--schedule", default="dyadic")
    args = p.parse_args()
    out = {}
    for name in sorted(fixtures.FIXTURES):
        t0 = time.perf_counter()
        oracle = LmrOracle(fixtures.get(name), resolution=args.resolution)
        sol = bangbang.construct(oracle, max_level=args.max_level, schedule=args.schedule)
        out[name] = {"L": oracle.L, "lambda": list(sol.lam), "levels": sol.trace(),
                     "normalization_error": bangbang.normalization_error(oracle, sol),
                     "seconds": time.perf_counter() - t0}
        print(f"{name:10s} L={oracle.L:.6f} lambda={[round(x, 5) for x in sol.lam]} "
              f"norm={out[name]['normalization_error']:.1e} ({out[name]['seconds']:.1f}s)")
    save(args, f"construct_{args.schedule}.json", out)


if __name__ == "__main__":
    main()
