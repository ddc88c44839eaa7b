"""Zipper error against the radial slit closed forms as the resolution grows."""
import math
import time

from _common import parser, save
from slitloewner.zipper import map_disk_minus_slits


def main():
    args = parser(__doc__).parse_args()
    rows = []
    for x in (0.2, 3 - 2 * math.sqrt(2), 0.5, 0.8):
        single = math.log((1 + x) ** 2 / (4 * x))
        pair = 0.5 * math.log((1 + x * x) ** 2 / (4 * x * x))
        for res in (64, 128, 256, 512, 1000, 2000, 4000, 8000):
            t0 = time.perf_counter()
            a = map_disk_minus_slits([[1.0, x]], res, record=False).lmr_value
            b = map_disk_minus_slits([[1.0, x], [-1.0, -x]], res, record=False).lmr_value
            rows.append({"x": x, "resolution": res, "single_error": abs(a - single),
                         "pair_error": abs(b - pair), "seconds": time.perf_counter() - t0})
            print(f"x={x:.4f} R={res:5d} single {rows[-1]['single_error']:.2e} "
                  f"pair {rows[-1]['pair_error']:.2e}")
    save(args, "closed_form_convergence.json", rows)


if __name__ == "__main__":
    main()
