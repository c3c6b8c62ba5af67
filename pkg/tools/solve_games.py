import argparse
import json
import os
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from engine.solvers import compute_game_values  # noqa: E402

DEFAULT_GOLDEN = os.fspath(ROOT / "tests" / "golden" / "game_values.json")


def _render(values: dict) -> str:
    return json.dumps(values, indent=2, sort_keys=True) + "\n"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Solve the small suite games and write or check the golden values.")
    parser.add_argument("--out", default=DEFAULT_GOLDEN, help="Golden file to write (default: tests/golden/game_values.json).")
    parser.add_argument("--check", action="store_true", help="Compare against the existing file instead of writing it.")
    args = parser.parse_args(argv)

    values = compute_game_values()
    if args.check:
        stored = json.loads(Path(args.out).read_text(encoding="utf-8"))
        if stored != values:
            print(f"Golden values differ from {args.out}")
            print(_render(values))
            return 1
        print(f"Golden values match {args.out}")
        return 0
    Path(args.out).write_text(_render(values), encoding="utf-8")
    print(f"Wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
