#!/usr/bin/env python3
"""Generates the synthetic campus fixture and the shipped scenario files.

The map is a 19x19 king-move grid (each cell connects to its 8 neighbours,
both directions) plus a fast three-link highway ramp from the northern
entrance into the campus core. Mean out-degree lands near 7. Outputs are
written to the data/ directory and checked in; rerun only when the layout
changes.
"""

import json
import os

ROWS = COLS = 19
LINK_LEN = 100.0
LINK_SPEED = 13.9  # ~50 km/h
RAMP_SPEED = 25.0

NORTH_ENTRANCE = "L_00_09"
SOUTH_ENTRANCE = "L_18_09"
TERMINAL_ADJ = "L_03_10"
BIBLIOTECA_ADJ = "L_04_09"
MULTIPIANO_ADJ = "L_16_09"
NORTHWEST = "L_00_00"


def lid(r, c):
    return f"L_{r:02d}_{c:02d}"


def build_network():
    links = []
    for r in range(ROWS):
        for c in range(COLS):
            out = []
            if lid(r, c) == NORTH_ENTRANCE:
                out.append("R1")  # ramp entry comes first in file order
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    if dr == 0 and dc == 0:
                        continue
                    rr, cc = r + dr, c + dc
                    if 0 <= rr < ROWS and 0 <= cc < COLS:
                        out.append(lid(rr, cc))
            links.append({
                "id": lid(r, c),
                "length_m": LINK_LEN,
                "speed_mps": LINK_SPEED,
                "out": out,
            })
    # Highway ramp: fast chain with escape exits back into the grid.
    links.append({"id": "R1", "length_m": LINK_LEN, "speed_mps": RAMP_SPEED,
                  "out": ["R2", "L_01_09"]})
    links.append({"id": "R2", "length_m": LINK_LEN, "speed_mps": RAMP_SPEED,
                  "out": ["R3", "L_02_09"]})
    links.append({"id": "R3", "length_m": LINK_LEN, "speed_mps": RAMP_SPEED,
                  "out": ["L_02_08", "L_02_09", "L_02_10",
                          "L_03_08", "L_03_09", "L_03_10"]})
    return links


def lots(capacity):
    return [
        {"id": "terminal", "capacity": capacity, "adjacent": [TERMINAL_ADJ]},
        {"id": "biblioteca", "capacity": capacity, "adjacent": [BIBLIOTECA_ADJ]},
        {"id": "multipiano", "capacity": capacity, "adjacent": [MULTIPIANO_ADJ]},
    ]


SOURCES = {
    "route": {
        "to_north_entrance": NORTH_ENTRANCE,
        "to_south_entrance": SOUTH_ENTRANCE,
        "to_terminal": TERMINAL_ADJ,
        "to_biblioteca": BIBLIOTECA_ADJ,
        "to_multipiano": MULTIPIANO_ADJ,
        "to_northwest": NORTHWEST,
    },
    "merged": [
        {"name": "merged_bt",
         "components": ["to_biblioteca", "to_terminal"],
         "weights": [0.5, 0.5]},
    ],
}

LOT_SOURCE = {
    "terminal": "to_terminal",
    "biblioteca": "to_biblioteca",
    "multipiano": "to_multipiano",
}


def arrivals(north, south, headway):
    out = []
    t = 0.0
    for _ in range(north):
        out.append({"time": t, "origin": NORTH_ENTRANCE,
                    "dest_lot": "terminal", "target": "merged_bt"})
        t += headway
    for _ in range(south):
        out.append({"time": t, "origin": SOUTH_ENTRANCE,
                    "dest_lot": "multipiano", "target": "to_multipiano"})
        t += headway
    # Times stay on the fixed 15 s slots; the simulator shuffles which trip
    # occupies which slot.
    times = sorted(a["time"] for a in out)
    for a, tt in zip(out, times):
        a["time"] = tt
    return out


def scenario1(desk=True):
    n_north, n_south = (20, 10) if desk else (100, 50)
    return {
        "network": "campus.json" if desk else "campus_paper.json",
        "start_time": "2023-05-15T08:00:00Z",
        "duration_s": 2000.0 if desk else 4800.0,
        "horizon": 3,
        "seed": 1,
        "controlled_count": n_north + n_south,
        "epsilon": 0.02,
        "sources": SOURCES,
        "lot_source": LOT_SOURCE,
        "arrivals": arrivals(n_north, n_south, 15.0),
        "obstructions": [
            {"link": "R1", "status": "slowed", "speed_mps": 0.12, "from_s": 0.0},
            {"link": "R2", "status": "slowed", "speed_mps": 0.12, "from_s": 0.0},
            {"link": "R3", "status": "slowed", "speed_mps": 0.12, "from_s": 0.0},
        ],
    }


def scenario2():
    return {
        "network": "campus.json",
        "start_time": "2023-05-15T08:00:00Z",
        "duration_s": 600.0,
        "horizon": 3,
        "seed": 1,
        "controlled_count": 2,
        "epsilon": 0.02,
        "sources": SOURCES,
        "lot_source": LOT_SOURCE,
        "arrivals": [
            {"time": 0.0, "origin": NORTH_ENTRANCE,
             "dest_lot": "terminal", "target": "to_terminal"},
            {"time": 30.0, "origin": NORTH_ENTRANCE,
             "dest_lot": "terminal", "target": "to_terminal"},
        ],
        "obstructions": [],
        "feed": {"file": "feed_scenario2.ndjson",
                 "aliases": "aliases.json",
                 "poll_s": 10.0},
    }


def main():
    here = os.path.dirname(os.path.abspath(__file__))
    data = os.path.join(here, "..", "data")
    os.makedirs(data, exist_ok=True)

    links = build_network()

    def dump(name, obj):
        with open(os.path.join(data, name), "w") as f:
            json.dump(obj, f, indent=1)
            f.write("\n")

    dump("campus.json", {"links": links, "lots": lots(10)})
    dump("campus_paper.json", {"links": links, "lots": lots(50)})
    dump("scenario1.json", scenario1(desk=True))
    dump("scenario1_paper.json", scenario1(desk=False))
    dump("scenario2.json", scenario2())
    dump("aliases.json", {"north highway ramp": "R1",
                          "terminal lot road": TERMINAL_ADJ})
    with open(os.path.join(data, "feed_scenario2.ndjson"), "w") as f:
        f.write(json.dumps({
            "author": "campus_authority",
            "timestamp": "2023-05-15T08:00:25Z",
            "text": "North highway ramp blocked #sumo_experiment",
        }) + "\n")

    degs = sum(len(l["out"]) for l in links) / len(links)
    print(f"links={len(links)} mean_out_degree={degs:.2f}")


if __name__ == "__main__":
    main()
