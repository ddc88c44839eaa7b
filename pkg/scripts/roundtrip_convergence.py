"""Hausdorff distance of regenerated traces as the number of Loewner steps grows."""
from _common import parser, save
from slitloewner import bangbang, fixtures
from slitloewner.geometry import hausdorff
from slitloewner.lmr_oracle import LmrOracle
from slitloewner.loewner import regenerate_traces


def main():
    p = parser(__doc__)
    p.add_argument("--max-level", type=int, default=6)
    args = p.parse_args()
    out = {}
    for name in sorted(fixtures.FIXTURES):
        system = fixtures.get(name)
        oracle = LmrOracle(system, resolution=args.resolution)
        sol = bangbang.construct(oracle, max_level=args.max_level, min_level=args.max_level)
        rows = []
        for steps in (16, 32, 64, 128, 256, 512):
            for order in ("alternate", "fixed"):
                tr = regenerate_traces(sol.lam, sol.times, sol.xi_tables, steps, order)
                hd = [hausdorff(tr.traces[k], s.points) for k, s in enumerate(system.slits)]
                rows.append({"steps": steps, "order": order, "hausdorff": hd,
                             "scale": [tr.scale(k) for k in range(sol.m)]})
                print(f"{name:10s} {order:9s} steps={steps:4d} hausdorff "
                      + " ".join(f"{h:.2e}" for h in hd))
        out[name] = rows
    save(args, "roundtrip_convergence.json", out)


if __name__ == "__main__":
    main()
