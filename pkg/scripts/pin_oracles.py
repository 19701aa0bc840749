"""Regenerate the packaged pin manifest from the default oracle sweeps.

Usage: python scripts/pin_oracles.py [--out PATH] [--threads N]
"""

import argparse
import json
import time

from residue_lab.pins import DEFAULT_PLAN, default_manifest_path, pin_oracle


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(default_manifest_path()))
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    t0 = time.perf_counter()
    manifest = pin_oracle(DEFAULT_PLAN, args.threads)
    with open(args.out, "w") as fh:
        json.dump(manifest, fh, indent=1)
        fh.write("\n")
    for name, pin in manifest["pins"].items():
        print(f"{name:34s} {pin['kind']} {pin['value']:.6g}  at {pin['where']}")
    print(f"wrote {args.out} in {time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
