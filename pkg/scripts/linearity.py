"""Distance of the partition-sum integrals from lambda*t as the mesh shrinks."""
import numpy as np

from _common import parser, save
from slitloewner import bangbang, fixtures
from slitloewner.lmr_oracle import LmrOracle


def main():
    p = parser(__doc__)
    p.add_argument("--fixture", default="asymmetric")
    p.add_argument("--max-level", type=int, default=6)
    args = p.parse_args()
    oracle = LmrOracle(fixtures.get(args.fixture), resolution=args.resolution)
    sol = bangbang.construct(oracle, max_level=args.max_level, min_level=args.max_level)
    rows = []
    for d in (2, 4, 8, 16, 32):
        Z = np.linspace(0, sol.L, d + 1)
        c = bangbang.coefficient_integrals(oracle, sol, Z)
        err = [float(np.max(np.abs(c[k] - sol.lam[k] * Z))) for k in range(sol.m)]
        rows.append({"pieces": d, "error": err})
        print(f"|Z|=L/{d:<3d} error " + " ".join(f"{e:.3e}" for e in err))
    save(args, f"linearity_{args.fixture}.json", rows)


if __name__ == "__main__":
    main()
