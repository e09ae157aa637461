"""Write a fixture input bundle plus a run.cfg, ready for ``heatpath run --config``."""
import argparse
from pathlib import Path

from heatpath.fixtures import three_stop_bundle, worked_example_bundle

BUNDLES = {
    "example": lambda: worked_example_bundle(with_hot_walks=True),
    "three-stop": three_stop_bundle,
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("bundle", choices=sorted(BUNDLES))
    ap.add_argument("directory")
    args = ap.parse_args(argv)
    d = Path(args.directory)
    paths = BUNDLES[args.bundle]().write(d)
    lines = [f"{k} = {Path(v).relative_to(d)}" for k, v in paths.items()] + ["out = out"]
    (d / "run.cfg").write_text("\n".join(lines) + "\n")
    print(f"wrote {args.bundle} bundle to {d}; run: heatpath run --config {d / 'run.cfg'}")


if __name__ == "__main__":
    main()
