import json, math, sys
N = 24
lim7 = float(sys.argv[1]) if len(sys.argv) > 1 else None
lines = [
    {"name": "L1", "from": 0, "to": 1, "reactance": 0.10, "limit": 250},
    {"name": "L2", "from": 1, "to": 2, "reactance": 0.10, "limit": 250},
    {"name": "L3", "from": 2, "to": 3, "reactance": 0.12, "limit": 250},
    {"name": "L4", "from": 3, "to": 4, "reactance": 0.10, "limit": 250},
    {"name": "L5", "from": 4, "to": 5, "reactance": 0.10, "limit": 250},
    {"name": "L6", "from": 5, "to": 0, "reactance": 0.15, "limit": 250},
    {"name": "L7", "from": 1, "to": 4, "reactance": 0.20},
]
if lim7: lines[6]["limit"] = lim7
share = [0.0, 0.15, 0.25, 0.20, 0.20, 0.20]
loads, fc, rp, rm = [], [], [], []
for t in range(N):
    total = 300 + 25 * math.sin(2 * math.pi * t / 24)
    loads.append([round(total * s, 3) for s in share])
    m1 = 45 + 10 * math.sin(2 * math.pi * t / 12)
    m2 = 30 + 6 * math.cos(2 * math.pi * t / 12)
    fc.append({"mu": [round(m1, 3), round(m2, 3)],
               "sigma": [[0.36, 0.12], [0.12, 0.25]],
               "caps": [90, 70], "W_bar": 160})
    rp.append(10); rm.append(5)
doc = {
  "name": "six-bus example",
  "description": "Synthetic 6-bus system: 2 wind farms, 2 AGC and 2 non-AGC units. Profiles are synthetic.",
  "grid": {"buses": 6, "slack": 0, "lines": lines},
  "horizon": {"T": 12, "dT_minutes": 5,
              "initial_outputs": {"G1": 100, "G2": 50, "A1": 50, "A2": 30}},
  "prices": {"gamma_up": 12, "gamma_down": 24},
  "units": {
    "participation": "proportional",
    "non_agc": [
      {"name": "G1", "bus": 0, "p_min": 30, "p_max": 200, "ramp_rate": 0.05, "cost": {"a": 0.004, "b": 8, "c": 100}},
      {"name": "G2", "bus": 2, "p_min": 20, "p_max": 150, "ramp_rate": 0.05, "cost": {"a": 0.006, "b": 9, "c": 80}}],
    "agc": [
      {"name": "A1", "bus": 3, "p_min": 20, "p_max": 140, "ramp_rate": 0.1, "cost": {"a": 0.008, "b": 10, "c": 60}},
      {"name": "A2", "bus": 5, "p_min": 15, "p_max": 100, "ramp_rate": 0.1, "cost": {"a": 0.01, "b": 10.5, "c": 40}}]},
  "wind_farms": [{"name": "W1", "bus": 1, "capacity": 90}, {"name": "W2", "bus": 4, "capacity": 70}],
  "loads": loads,
  "forecasts": fc,
  "risk": {"delta": 0.02, "beta": 0.02, "epsilon": 0.02, "eta": 0.02},
  "reserves": {"R_plus": rp, "R_minus": rm},
}
print(json.dumps(doc, indent=1))
