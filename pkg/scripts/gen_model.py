"""Print a generated model (or the desk-scale plant) to stdout."""

import argparse

import _common  # noqa: F401  (path setup)

from modat.gen import GenConfig, desk_scale_model, desk_scale_scenario, random_model


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--desk", action="store_true", help="desk-scale plant instead of a random model")
    ap.add_argument("--scenario", action="store_true", help="with --desk: print its 1000-cycle scenario")
    ap.add_argument("--layers", type=int, default=GenConfig.layers)
    ap.add_argument("--adapt-only", action="store_true", help="variants only adapt (rebase-friendly)")
    args = ap.parse_args()
    if args.desk:
        print(desk_scale_scenario() if args.scenario else desk_scale_model(), end="")
    else:
        print(random_model(args.seed, GenConfig(layers=args.layers), args.adapt_only), end="")


if __name__ == "__main__":
    main()
