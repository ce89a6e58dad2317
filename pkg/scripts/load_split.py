"""Efficiency and reactive draw of four ways to share 5 MW across identical units at 80 degC.

    python3 scripts/load_split.py
"""
from h2sched.fleet import ElectrolyzerParams, evaluate_split

SPLITS = {
    "3 units, even": [5000 / 3] * 3,
    "2 units, even": [2500.0, 2500.0],
    "3.75 + 1.25 MW": [3750.0, 1250.0],
    "1 unit": [5000.0],
}


def main():
    unit = ElectrolyzerParams()
    print(f"{'allocation':<18}{'efficiency':>12}{'Q [MVar]':>11}   currents [kA]")
    for name, powers in SPLITS.items():
        r = evaluate_split(unit, powers)
        cur = ", ".join(f"{i:.2f}" for i in r.currents)
        print(f"{name:<18}{r.efficiency:>12.4f}{r.q_mvar:>11.3f}   {cur}")


if __name__ == "__main__":
    main()
