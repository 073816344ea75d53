"""Writes the synthetic systems used by the acceptance run into data/.

    python3 tools/make_acceptance_systems.py data
"""
import json
import math
import os
import random
import sys

RISK = {"delta": 0.02, "beta": 0.02, "epsilon": 0.02, "eta": 0.02}


def unit(name, bus, p_min, p_max, b, a=0.0, c=0.0, ramp=None):
    u = {"name": name, "bus": bus, "p_min": p_min, "p_max": p_max, "cost": {"a": a, "b": b, "c": c}}
    if ramp is not None:
        u["ramp_rate"] = ramp
    return u


def aprr_swing():
    # One bus; the wind forecast alternates by 60 MW every period. Flat AGC
    # cost curves make the AGC units the cheapest way to follow it, but at
    # 0.04 of capacity per period they can only schedule 40 MW of it. The
    # ramp band is wide against the wind scale so that the idle side of each
    # ramp limit is almost never crossed.
    t_count = 8
    mu = [110.0 if t % 2 == 0 else 50.0 for t in range(t_count)]
    return {
        "name": "wind swing",
        "description": "Single bus, alternating wind forecast; AGC ramp rate 0.04 of capacity per period.",
        "grid": {"buses": 1, "slack": 0, "lines": []},
        "horizon": {"T": 6, "dT_minutes": 5,
                    "initial_outputs": {"G1": 100, "A1": 95, "A2": 95}},
        "prices": {"gamma_up": 12, "gamma_down": 24},
        "units": {
            "participation": "proportional",
            "non_agc": [unit("G1", 0, 0, 300, 8, a=0.05, ramp=0.1)],
            "agc": [unit("A1", 0, 0, 500, 10, a=0.001, ramp=0.04),
                    unit("A2", 0, 0, 500, 10, a=0.001, ramp=0.04)]},
        "wind_farms": [{"name": "W1", "bus": 0, "capacity": 150}],
        "loads": [[400.0] for _ in range(t_count)],
        "forecasts": [{"mu": [m], "sigma": [[0.01]], "caps": [150], "W_bar": 150} for m in mu],
        "risk": RISK,
        "reserves": {"R_plus": [10] * t_count, "R_minus": [5] * t_count},
    }


def tight_line():
    # Wind and the AGC unit sit at opposite ends of L12, so AGC response
    # doubles the flow swing the wind alone would cause. The limit is wide
    # against the wind scale so the far side of the line is almost never hit.
    t_count = 3
    return {
        "name": "tight line",
        "description": "Three buses; L12 separates the wind farm from the only AGC unit.",
        "grid": {"buses": 3, "slack": 2, "lines": [
            {"name": "L12", "from": 0, "to": 1, "reactance": 0.1, "limit": 60},
            {"name": "L23", "from": 1, "to": 2, "reactance": 0.1},
            {"name": "L13", "from": 0, "to": 2, "reactance": 0.1}]},
        "horizon": {"T": t_count, "dT_minutes": 5},
        "prices": {"gamma_up": 12, "gamma_down": 24},
        "units": {
            "participation": "proportional",
            "non_agc": [unit("G1", 0, 0, 300, 5, a=0.002), unit("G2", 2, 0, 400, 20, a=0.002)],
            "agc": [unit("A1", 1, 0, 100, 10, a=0.004)]},
        "wind_farms": [{"name": "W1", "bus": 0, "capacity": 150}],
        "loads": [[0.0, 0.0, 450.0 + 10.0 * t] for t in range(t_count)],
        "forecasts": [{"mu": [60.0], "sigma": [[0.04]], "caps": [150], "W_bar": 150} for _ in range(t_count)],
        "risk": RISK,
    }


# 24-bus reliability-test-system topology (1-based bus pairs, reactance p.u.).
RTS_BRANCHES = [
    (1, 2, 0.0139), (1, 3, 0.2112), (1, 5, 0.0845), (2, 4, 0.1267), (2, 6, 0.1920), (3, 9, 0.1190),
    (3, 24, 0.0839), (4, 9, 0.1037), (5, 10, 0.0883), (6, 10, 0.0605), (7, 8, 0.0614), (8, 9, 0.1651),
    (8, 10, 0.1651), (9, 11, 0.0839), (9, 12, 0.0839), (10, 11, 0.0839), (10, 12, 0.0839), (11, 13, 0.0476),
    (11, 14, 0.0418), (12, 13, 0.0476), (12, 23, 0.0966), (13, 23, 0.0865), (14, 16, 0.0389),
    (15, 16, 0.0173), (15, 21, 0.0490), (15, 21, 0.0490), (15, 24, 0.0519), (16, 17, 0.0259),
    (16, 19, 0.0231), (17, 18, 0.0144), (17, 22, 0.1053), (18, 21, 0.0259), (18, 21, 0.0259),
    (19, 20, 0.0396), (19, 20, 0.0396), (20, 23, 0.0216), (20, 23, 0.0216), (21, 22, 0.0678),
]
LOAD_SHARE = {1: 3.8, 2: 3.4, 3: 6.3, 4: 2.6, 5: 2.5, 6: 4.8, 7: 4.4, 8: 6.0, 9: 6.1, 10: 6.8,
              13: 9.3, 14: 6.8, 15: 11.1, 16: 3.5, 18: 11.7, 19: 6.4, 20: 4.5}


def rts24_scale():
    rng = random.Random(24)
    t_count = 12
    lines = []
    for i, (f, t, x) in enumerate(RTS_BRANCHES):
        limit = 175 if x > 0.08 else 500
        lines.append({"name": f"B{i + 1}", "from": f - 1, "to": t - 1, "reactance": x, "limit": limit})

    non_agc_buses = [1, 1, 2, 2, 7, 7, 7, 13, 13, 15, 15, 15, 16, 18, 21, 22, 22, 23, 23, 23]
    agc_buses = [1, 2, 7, 13, 13, 15, 16, 18, 21, 22, 23, 23]
    non_agc, agc = [], []
    for i, b in enumerate(non_agc_buses):
        p_max = rng.choice([50, 80, 100, 150, 200])
        non_agc.append(unit(f"G{i + 1}", b - 1, 0.2 * p_max, p_max, round(rng.uniform(6, 14), 2),
                            a=round(rng.uniform(0.001, 0.01), 4), c=50, ramp=0.1))
    for j, b in enumerate(agc_buses):
        p_max = rng.choice([80, 100, 120])
        agc.append(unit(f"A{j + 1}", b - 1, 0.1 * p_max, p_max, round(rng.uniform(10, 16), 2),
                        a=round(rng.uniform(0.004, 0.012), 4), c=30, ramp=0.15))

    wind_buses = [1, 3, 4, 5, 6, 8, 9, 10, 11, 12, 14, 16, 17, 19, 20, 21, 24]
    k = len(wind_buses)
    caps = [rng.choice([40, 60, 80]) for _ in range(k)]
    base = [c * rng.uniform(0.35, 0.6) for c in caps]
    scale = [rng.uniform(0.6, 1.2) for _ in range(k)]
    sigma = [[round(scale[i] * scale[j] * 0.3 ** abs(i - j), 6) for j in range(k)] for i in range(k)]

    p_total = sum(u["p_max"] for u in non_agc + agc)
    loads, forecasts = [], []
    for t in range(t_count + 12):
        total = 1500 + 120 * math.sin(2 * math.pi * t / 24)
        loads.append([round(total * LOAD_SHARE.get(b + 1, 0.0) / sum(LOAD_SHARE.values()), 3) for b in range(24)])
        swing = 1.0 + 0.1 * math.sin(2 * math.pi * t / 12)
        forecasts.append({"mu": [round(m * swing, 3) for m in base], "sigma": sigma, "caps": caps,
                          "W_bar": sum(caps)})

    # Initial outputs: merit-free proportional split of the first net load.
    net = sum(loads[0]) - sum(f for f in forecasts[0]["mu"])
    initial = {}
    p_min_total = sum(u["p_min"] for u in non_agc + agc)
    frac = (net - p_min_total) / (p_total - p_min_total)
    for u in non_agc + agc:
        initial[u["name"]] = round(u["p_min"] + frac * (u["p_max"] - u["p_min"]), 3)

    return {
        "name": "24-bus scale test",
        "description": "Reliability-test-system topology with 20 non-AGC, 12 AGC units and 17 wind farms. "
                       "Unit data and profiles are synthetic.",
        "grid": {"buses": 24, "slack": 12, "lines": lines},
        "horizon": {"T": t_count, "dT_minutes": 5, "initial_outputs": initial},
        "prices": {"gamma_up": 12, "gamma_down": 24},
        "units": {"participation": "proportional", "non_agc": non_agc, "agc": agc},
        "wind_farms": [{"name": f"W{i + 1}", "bus": b - 1, "capacity": caps[i]} for i, b in enumerate(wind_buses)],
        "loads": loads,
        "forecasts": forecasts,
        "risk": RISK,
        "reserves": {"R_plus": [40] * len(loads), "R_minus": [20] * len(loads)},
    }


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "data"
    for name, doc in [("aprr_swing", aprr_swing()), ("tight_line", tight_line()), ("rts24_scale", rts24_scale())]:
        with open(os.path.join(out, name + ".json"), "w") as f:
            json.dump(doc, f, indent=1)
            f.write("\n")


if __name__ == "__main__":
    main()
