"""CHSH value against hidden-angle sharpness, next to the entangled source."""

import argparse

import numpy as np

from qfound.polarizer import HVModelParams, Source, chsh_experiment


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-pairs", type=int, default=500_000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)
    settings = (45.0, 0.0, 22.5, 67.5)
    q = chsh_experiment(*settings, Source.ENTANGLED_COPENHAGEN, args.n_pairs, args.seed)
    print(f"entangled source        B = {q.value:+.4f} +- {q.stderr:.4f}")
    for s in (1.0, 2.0, 4.0, 8.0):
        for r in (0.0, 0.5, 1.0):
            h = chsh_experiment(*settings, Source.COMMON_HIDDEN_ANGLE, args.n_pairs, args.seed, HVModelParams(s, r))
            print(f"hidden angle s={s:<3g} r={r:<3g} B = {h.value:+.4f} +- {h.stderr:.4f}")
    print(f"reference: 2, 2 sqrt 2 = {2 * np.sqrt(2):.4f}")


if __name__ == "__main__":
    main()
