#!/usr/bin/env python3
"""Writes the bundled desk corpus: 50 small tables, their context paragraphs,
a 30-template pack and a pipeline config.

Every table's context holds one sentence about a row the table lacks, so the
expansion branch has something to read.
"""

import argparse
import json
import random
from pathlib import Path

CITY_NAMES = ["Ashford", "Brookmere", "Calder", "Dunmore", "Eastwick", "Fairhaven", "Glenrock", "Harlow",
              "Ivybridge", "Kingsley", "Larkfield", "Marston", "Norwick", "Oakham", "Pendle", "Queensbury",
              "Redcliff", "Stanton", "Thornbury", "Upton", "Westfield", "Yarrow"]
REGIONS = ["North", "South", "Coastal", "Highland"]
TEAMS = ["Falcons", "Rovers", "Pilots", "Comets", "Miners", "Harriers", "Wolves", "Mariners", "Rangers",
         "Titans", "Bulldogs", "Stallions", "Raiders", "Hornets"]
COACHES = ["Adams", "Baker", "Clarke", "Dixon", "Evans", "Foster"]
PRODUCTS = ["Lantern", "Kettle", "Backpack", "Compass", "Blender", "Toaster", "Headlamp", "Tripod",
            "Notebook", "Stapler", "Thermos", "Umbrella", "Whistle", "Hammock"]
CATEGORIES = ["Outdoor", "Kitchen", "Office"]
DEPARTMENTS = ["Treasury", "Defence", "Health", "Education", "Transport", "Justice", "Energy", "Agriculture",
               "Culture", "Labour", "Housing", "Tourism", "Fisheries", "Science"]
PARTIES = ["Liberal", "Labour", "Green"]


def fmt(n):
    return f"{n:,}"


def city_table(rng, k):
    names = rng.sample(CITY_NAMES, rng.randint(5, 8) + 1)
    new, names = names[0], names[1:]
    header = ["city", "population", "area", "region", "founded"]

    def row(name):
        return [name, fmt(rng.randint(2000, 90000)), str(rng.randint(10, 400)), rng.choice(REGIONS),
                str(rng.randint(1200, 1900))]

    rows = [row(n) for n in names]
    if rng.random() < 0.3:
        rows[rng.randrange(len(rows))][4] = ""
    extra = row(new)
    paragraphs = [
        f"The region is home to several towns. {names[0]} grew quickly after the railway arrived.",
        f"The town of {new} has a population of {extra[1]} and an area of {extra[2]} square kilometres.",
    ]
    return f"cities_{k:02d}", header, rows, paragraphs


def year_table(rng, k):
    start = rng.randint(2008, 2014)
    years = list(range(start, start + rng.randint(4, 7)))
    header = ["year", "revenue", "cost", "profit", "employees"]

    def row(y):
        revenue = rng.randint(800, 9000)
        cost = rng.randint(300, revenue)
        return [str(y), fmt(revenue), fmt(cost), fmt(revenue - cost), str(rng.randint(20, 400))]

    rows = [row(y) for y in years]
    extra = row(years[-1] + 1)
    paragraphs = [
        f"In {years[1]} the board approved a new strategy.",
        f"In {extra[0]} the revenue was {extra[1]} while the cost was {extra[2]}, and the company kept {extra[4]} employees.",
    ]
    return f"ledger_{k:02d}", header, rows, paragraphs


def team_table(rng, k):
    names = rng.sample(TEAMS, rng.randint(5, 8) + 1)
    new, names = names[0], names[1:]
    header = ["team", "wins", "losses", "points", "coach"]

    def row(name):
        wins = rng.randint(2, 20)
        losses = rng.randint(2, 20)
        return [name, str(wins), str(losses), str(wins * 3 + rng.randint(0, 5)), rng.choice(COACHES)]

    rows = [row(n) for n in names]
    extra = row(new)
    paragraphs = [
        f"The league expanded this season. The {names[0]} finished strongly.",
        f"Newcomers {new} posted wins of {extra[1]} against losses of {extra[2]} for points of {extra[3]}.",
    ]
    return f"league_{k:02d}", header, rows, paragraphs


def product_table(rng, k):
    names = rng.sample(PRODUCTS, rng.randint(5, 8) + 1)
    new, names = names[0], names[1:]
    header = ["product", "price", "units sold", "rating", "category"]

    def row(name):
        return [name, f"${rng.randint(5, 300)}", fmt(rng.randint(100, 20000)), f"{rng.randint(20, 50) / 10:.1f}",
                rng.choice(CATEGORIES)]

    rows = [row(n) for n in names]
    extra = row(new)
    paragraphs = [
        f"The catalogue was refreshed in spring. The {names[0]} remains popular.",
        f"A new {new} launched with a price of {extra[1]} and units sold of {extra[2]} in its first quarter.",
    ]
    return f"catalog_{k:02d}", header, rows, paragraphs


def department_table(rng, k):
    names = rng.sample(DEPARTMENTS, rng.randint(5, 8) + 1)
    new, names = names[0], names[1:]
    header = ["department", "total deputies", "budget", "share", "party"]

    def row(name):
        return [name, str(rng.randint(2, 30)), fmt(rng.randint(100, 5000)), f"{rng.randint(1, 40)}%",
                rng.choice(PARTIES)]

    rows = [row(n) for n in names]
    extra = row(new)
    paragraphs = [
        f"The cabinet was reshuffled in March. {names[0]} kept its minister.",
        f"The newly created {new} office reports total deputies of {extra[1]} and a budget of {extra[2]}.",
    ]
    return f"cabinet_{k:02d}", header, rows, paragraphs


TEMPLATES = """\
# Desk pack: 10 SQL, 12 logical-form and 8 arithmetic templates.
sql|select c1 from w order by c2_number desc limit 1
sql|select c1 from w order by c2_number asc limit 1
sql|select c1 from w where c2 = val1
sql|select count(c1) from w where c2 = val1
sql|select max(c1_number) from w
sql|select min(c1_number) from w where c2 = val1
sql|select sum(c1_number) from w
sql|select c1 from w where c2_number > val1
sql|select c1_number - c2_number from w where c3 = val1
sql|select c1 from w where c2 = val1 and c3 = val2
logic|eq { hop { filter_eq { all_rows ; c1 ; val1 } ; c2 } ; val2 }
logic|eq { count { filter_eq { all_rows ; c1 ; val1 } } ; val2 }
logic|eq { hop { argmax { all_rows ; c1 } ; c2 } ; val1 }
logic|eq { max { all_rows ; c1 } ; val1 }
logic|greater { hop { filter_eq { all_rows ; c1 ; val1 } ; c2_number } ; val2 }
logic|less { sum { all_rows ; c1 } ; val1 }
logic|most_eq { all_rows ; c1 ; val1 }
logic|eq { avg { all_rows ; c1 } ; val1 }
logic|eq { hop { nth_argmax { all_rows ; c1 ; 2 } ; c2 } ; val1 }
logic|not_eq { hop { argmin { all_rows ; c1 } ; c2 } ; val1 }
logic|and { eq { hop { filter_eq { all_rows ; c1 ; val1 } ; c2 } ; val2 } ; greater { max { all_rows ; c3 } ; val3 } }
logic|eq { count { filter_greater { all_rows ; c1_number ; val1 } } ; val2 }
arith|subtract(val1, val2), divide(#0, val2)
arith|add(val1, val2)
arith|subtract(val1, val2)
arith|divide(val1, val2)
arith|table_average(c1, none)
arith|table_max(c1, none), subtract(#0, val1)
arith|multiply(val1, 100)
arith|add(val1, val2), divide(#0, 2)
"""


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", type=Path)
    ap.add_argument("--seed", type=int, default=20240601)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    makers = [city_table, year_table, team_table, product_table, department_table]
    tables_dir = args.out / "tables"
    tables_dir.mkdir(parents=True, exist_ok=True)
    contexts = {}
    for k in range(50):
        tid, header, rows, paragraphs = makers[k % len(makers)](rng, k // len(makers))
        with open(tables_dir / f"{tid}.json", "w", encoding="utf-8") as f:
            json.dump({"id": tid, "header": header, "rows": rows}, f, indent=1, ensure_ascii=False)
            f.write("\n")
        contexts[tid] = {"paragraphs": paragraphs}
    with open(args.out / "context.json", "w", encoding="utf-8") as f:
        json.dump(contexts, f, indent=1, ensure_ascii=False)
        f.write("\n")
    (args.out / "templates.pack").write_text(TEMPLATES, encoding="utf-8")
    config = {
        "tables": "tables",
        "contexts": "context.json",
        "templates": "templates.pack",
        "output": "out/corpus.jsonl",
        "tasks": ["qa", "fv"],
        "branches": ["table_only", "split", "expand"],
        "samples_per_table": 12,
        "draws_per_template": 2,
        "sampler": {"seed": 7, "max_attempts_per_template": 20, "label_ratio": 0.5},
    }
    with open(args.out / "config.json", "w", encoding="utf-8") as f:
        json.dump(config, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
