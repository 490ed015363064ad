"""Command line entry point.

Usage:
  hnls KIND --config FILE [--out DIR] [--seed U64] [--resume CKPT]

KIND is one of simulate, bilinear, virial, elliptic, energy-check,
equivalence, xsb.  Exit code: 0 = success or PASS verdict, 2 = FAIL verdict,
1 = error (bad config, unreadable checkpoint, ...).
"""

from __future__ import annotations

import argparse
import os
import sys

from hnls import config as cfgmod
from hnls import experiments as ex
from hnls.hermite import HermiteError

KINDS = {
    "simulate": ex.run_growth,
    "bilinear": ex.run_bilinear,
    "virial": ex.run_virial,
    "elliptic": ex.run_elliptic,
    "energy-check": ex.run_energy_check,
    "equivalence": ex.run_equivalence,
    "xsb": ex.run_xsb,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hnls",
        description="Hermite-spectral simulator and estimate verification lab",
    )
    parser.add_argument("kind", choices=sorted(KINDS))
    parser.add_argument("--config", required=True, help="flat key = value file")
    parser.add_argument("--out", default=None, help="output directory (default: cwd)")
    parser.add_argument("--seed", type=lambda s: int(s, 0), default=None,
                        help="64-bit run seed; overrides the config's seed key")
    parser.add_argument("--resume", default=None,
                        help="checkpoint to continue from (simulate only)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = cfgmod.load_config(args.config)
        seed = args.seed
        if seed is None:
            seed = cfgmod.get_int(cfg, "seed", 0)
        out_dir = args.out if args.out is not None else os.getcwd()
        if args.resume is not None:
            if args.kind != "simulate":
                print(f"error: --resume only applies to simulate, not {args.kind}",
                      file=sys.stderr)
                return 1
            record = ex.run_growth(cfg, out_dir, seed, resume=args.resume)
        else:
            record = KINDS[args.kind](cfg, out_dir, seed)
    except (HermiteError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    print(f"kind: {record.kind}")
    print(f"config_hash: {record.config_hash:016x}")
    print(f"seed: {seed}")
    for path in record.csv_paths:
        print(f"wrote: {path}")
    for path in record.checkpoint_paths:
        print(f"wrote: {path}")
    if record.exponent is not None:
        print(f"fitted_exponent: {record.exponent:.6f} "
              f"(stderr {record.exponent_stderr:.2e})")
    for key, val in record.details.items():
        print(f"{key}: {val}")
    print(f"elapsed: {record.elapsed:.2f}s")
    if record.verdict is not None:
        print(f"verdict: {record.verdict}")
        return 0 if record.verdict == "PASS" else 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
