#!/usr/bin/env python3
"""Generates the bundled synthetic district under data/synthetic.

Two single-family buildings in a hot-summer climate, one hour steps, 30 days
from 2018-06-01. The output is a pure function of SEED.

    python3 data/generate_synthetic.py [OUTPUT_DIR]
"""

import datetime as dt
import math
import pathlib
import random
import sys

SEED = 20180601
START = dt.datetime(2018, 6, 1)
DAYS = 30
STEPS_PER_DAY = 24
TRAIN_DAYS = 13

BUILDINGS = [
    {
        "id": "b1",
        "heat_pump": 2.3,
        "dhw_heater": 3.7,
        "dhw_storage": 1.7,
        "battery": (4.0, 3.3),
        "pv": 1.2,
        "setpoint": 23.9,
        "conductance": 0.15,
        "capacitance": 3.0,
        "internal_gain": 0.3,
        "dhw_daily": 6.0,
        "plug_base": 0.22,
        "plug_evening": 0.55,
    },
    {
        "id": "b2",
        "heat_pump": 2.8,
        "dhw_heater": 6.3,
        "dhw_storage": 2.8,
        "battery": (3.3, 1.6),
        "pv": 2.4,
        "setpoint": 23.3,
        "conductance": 0.2,
        "capacitance": 3.0,
        "internal_gain": 0.35,
        "dhw_daily": 11.0,
        "plug_base": 0.35,
        "plug_evening": 0.9,
    },
]

HEATER_EFFICIENCY = 0.9
HP_TECHNICAL_EFFICIENCY = 0.2
HP_TARGET = 8.0
HP_COP_CAP = 10.0


def cop(outdoor):
    lift = outdoor - HP_TARGET
    if lift <= 0:
        return HP_COP_CAP
    return min(max(HP_TECHNICAL_EFFICIENCY * (HP_TARGET + 273.15) / lift, 1.0), HP_COP_CAP)


def bump(hour, centre, width):
    d = (hour - centre + 12) % 24 - 12
    return math.exp(-0.5 * (d / width) ** 2)


def weather(rng):
    temps, pv = [], []
    for day in range(DAYS):
        day_max = 33.0 + rng.uniform(-2.5, 3.0)
        day_min = 24.5 + rng.uniform(-1.0, 1.5)
        clear = rng.uniform(0.6, 1.0)
        for hour in range(STEPS_PER_DAY):
            # warmest near 16:00, coolest near 06:00
            phase = math.cos(2 * math.pi * (hour - 16) / 24)
            t = day_min + (day_max - day_min) * (phase + 1) / 2 + rng.gauss(0, 0.3)
            temps.append(round(min(max(t, 24.0), 36.0), 3))
            sun = math.sin(math.pi * (hour + 0.5 - 6.5) / 13.5) if 6.5 <= hour + 0.5 <= 20 else 0.0
            cloud = clear * rng.uniform(0.85, 1.0)
            pv.append(round(max(0.0, 0.82 * sun * cloud), 4))
    return temps, pv


def carbon(rng):
    out = []
    for _ in range(DAYS):
        level = rng.uniform(-0.03, 0.03)
        for hour in range(STEPS_PER_DAY):
            value = 0.38 + level + 0.12 * bump(hour, 13, 4.5) + 0.04 * bump(hour, 20, 2.0)
            out.append(round(value + rng.gauss(0, 0.008), 4))
    return out


def building_series(rng, spec, temps):
    max_dhw = 2.0 * spec["dhw_storage"]
    heater_cap = spec["dhw_heater"] * HEATER_EFFICIENCY
    rows = []
    for step, outdoor in enumerate(temps):
        day, hour = divmod(step, STEPS_PER_DAY)
        weekend = (START + dt.timedelta(days=day)).isoweekday() >= 6
        gain = spec["internal_gain"] + 0.25 * bump(hour, 15, 3.0)
        cooling = spec["conductance"] * (outdoor - spec["setpoint"]) + gain
        cooling *= rng.uniform(0.9, 1.1)
        cooling = min(max(cooling, 0.0), 0.95 * spec["heat_pump"] * cop(outdoor))

        shape = 0.9 * bump(hour, 7, 1.2) + 1.0 * bump(hour, 20, 1.8) + 0.08
        if weekend:
            shape = 0.7 * bump(hour, 9.5, 1.8) + 0.9 * bump(hour, 19, 2.0) + 0.1
        dhw = spec["dhw_daily"] * shape / 7.0 * rng.uniform(0.7, 1.3)
        dhw = min(dhw, max_dhw, heater_cap)

        evening = bump(hour, 19.5, 2.5) + (0.5 * bump(hour, 12, 3) if weekend else 0.0)
        plug = spec["plug_base"] + spec["plug_evening"] * evening
        plug *= rng.uniform(0.85, 1.15)
        rows.append((round(cooling, 4), round(dhw, 4), round(plug, 4), spec["setpoint"]))
    return rows


def write_csv(path, header, rows):
    with open(path, "w", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(repr(v) for v in row) + "\n")


def manifest(buildings):
    lines = [
        "schema_version = 1",
        'name = "synthetic-two-home"',
        f"start = {START.strftime('%Y-%m-%dT%H:%M:%S')}",
        "step_minutes = 60",
        f"steps_per_day = {STEPS_PER_DAY}",
        'weather = "weather.csv"',
        'carbon = "carbon.csv"',
        "",
        "[split]",
        f"train_days = {TRAIN_DAYS}",
        f"test_days = {DAYS - TRAIN_DAYS}",
        "",
        "[outage]",
        'mode = "none"',
        "",
    ]
    for spec in buildings:
        capacity, power = spec["battery"]
        lines += [
            "[[buildings]]",
            f'id = "{spec["id"]}"',
            f'data = "{spec["id"]}.csv"',
            "",
            f"[buildings.heat_pump]",
            f"nominal_power = {spec['heat_pump']}",
            f"technical_efficiency = {HP_TECHNICAL_EFFICIENCY}",
            f"target_temp = {HP_TARGET}",
            f"cop_cap = {HP_COP_CAP}",
            "",
            "[buildings.dhw_heater]",
            f"nominal_power = {spec['dhw_heater']}",
            f"efficiency = {HEATER_EFFICIENCY}",
            "",
            "[buildings.dhw_storage]",
            f"capacity = {spec['dhw_storage']}",
            "",
            "[buildings.battery]",
            f"capacity = {capacity}",
            f"nominal_power = {power}",
            "round_trip_efficiency = 0.9",
            "soc_min_fraction = 0.2",
            "",
            "[buildings.pv]",
            f"nominal_power = {spec['pv']}",
            "",
            "[buildings.thermal]",
            f"capacitance = {spec['capacitance']}",
            f"conductance = {spec['conductance']}",
            f"internal_gain = {spec['internal_gain']}",
            "",
        ]
    return "\n".join(lines)


def main():
    out = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else pathlib.Path(__file__).parent / "synthetic"
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(SEED)
    temps, pv = weather(rng)
    write_csv(out / "weather.csv", ["outdoor_temp_c", "pv_per_kw_kwh"], zip(temps, pv))
    write_csv(out / "carbon.csv", ["kg_co2e_per_kwh"], [(c,) for c in carbon(rng)])
    for spec in BUILDINGS:
        write_csv(out / f"{spec['id']}.csv",
                  ["cooling_load_kwh", "dhw_load_kwh", "plug_load_kwh", "setpoint_c"],
                  building_series(rng, spec, temps))
    (out / "district.toml").write_text(manifest(BUILDINGS))


if __name__ == "__main__":
    main()
