#!/usr/bin/env python3
"""Regenerate the daily-schedule automaton fixture.

The machine plans a 10:00-20:00 day backwards from 20:00.  States are the
hours still to be filled; the stack counts meals left to schedule (D=3, Z=2,
E=1, N=0).  Activities: a/b/c meals (1h), d basketball (fixed 13:00-15:00),
e grocery shopping (1h), f house cleaning (1h), g homework (3h contiguous),
h laundry (instant), n doing nothing (1h, unbudgeted).  Meals may not end in
the hour before basketball starts, so no meal edge leaves hour 13.
"""

from pathlib import Path

HOURS = list(range(20, 9, -1))          # 20 .. 10
COUNTERS = ["D", "Z", "E", "N"]         # 3, 2, 1, 0 meals left
MEAL_STEP = {"D": "Z", "Z": "E", "E": "N"}

OUT = Path(__file__).resolve().parent.parent / "src" / "stackplan" / "fixtures" / "daily.pda"


def main() -> None:
    lines = [
        "# Daily-schedule automaton (regenerate with scripts/make_daily_pda.py).",
        "# Plans backwards: each edge decides the activity that ends at the",
        "# current hour state.  Stack symbols D Z E N count meals left to plan.",
        "states Start " + " ".join(str(h) for h in HOURS) + " Fin",
        "stack D Z E N",
        "inputs a b c d e f g h n",
        "start Start D",
        "accept Fin",
        "",
        "Start ( ~ , D ; D ) 20",
    ]
    for hour in HOURS:
        block = [f"# ending at {hour}:00"]
        nxt = hour - 1
        if hour >= 11:
            if hour != 13:  # meals may not end right before basketball
                for meal in ("a", "b", "c"):
                    for top, rest in MEAL_STEP.items():
                        block.append(f"{hour} ( {meal} , {top} ; {rest} ) {nxt}")
            if hour == 15:  # basketball occupies 13:00-15:00
                for top in COUNTERS:
                    block.append(f"{hour} ( d , {top} ; {top} ) 13")
            for activity in ("e", "f"):
                for top in COUNTERS:
                    block.append(f"{hour} ( {activity} , {top} ; {top} ) {nxt}")
            if hour >= 13:  # homework is a contiguous 3-hour block
                for top in COUNTERS:
                    block.append(f"{hour} ( g , {top} ; {top} ) {hour - 3}")
        # laundry is instant: a self-loop at any hour, including 10:00
        for top in COUNTERS:
            block.append(f"{hour} ( h , {top} ; {top} ) {hour}")
        if hour >= 11:
            for top in COUNTERS:
                block.append(f"{hour} ( n , {top} ; {top} ) {nxt}")
        lines.extend(block)
        lines.append("")
    lines.append("# done once the whole day is planned and all three meals are in")
    lines.append("10 ( ~ , N ; N ) Fin")
    OUT.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
