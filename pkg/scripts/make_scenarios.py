"""Regenerate the bundled scenario files (all renewable profiles are synthetic).

    python3 scripts/make_scenarios.py [--count 12] [--out src/h2sched/data]
"""
import argparse
from pathlib import Path

from h2sched.cases import case_study, random_profiles
from h2sched.scenario import save_scenario

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=12)
    ap.add_argument("--first-seed", type=int, default=101)
    ap.add_argument("--out", type=Path, default=ROOT / "src" / "h2sched" / "data")
    args = ap.parse_args()
    (args.out / "scenarios").mkdir(parents=True, exist_ok=True)
    save_scenario(case_study(meta={"profiles": "deterministic synthetic day"}), args.out / "case_study.json")
    for k in range(args.count):
        seed = args.first_seed + k
        scn = case_study(random_profiles(seed), name=f"synthetic_{seed}", meta={"profiles": "random synthetic day",
                                                                              "seed": seed})
        save_scenario(scn, args.out / "scenarios" / f"synthetic_{seed}.json")
    print(f"wrote case study and {args.count} synthetic scenarios under {args.out}")


if __name__ == "__main__":
    main()
