#!/usr/bin/env python3
"""Regenerates the synthetic apps, traces and scenarios under data/.

Everything is seeded, so running this twice gives identical files.
"""
import json
import math
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent / "data"


def layered_dag(n, rng, width=4):
    # nodes are split into layers; every node gets at least one parent in the
    # previous layer, plus occasional skip edges
    layers, i = [], 0
    while i < n:
        w = int(rng.integers(1, width + 1))
        layers.append(list(range(i, min(n, i + w))))
        i += w
    edges = set()
    for k in range(1, len(layers)):
        for v in layers[k]:
            edges.add((int(rng.choice(layers[k - 1])), v))
            if k >= 2 and rng.random() < 0.25:
                edges.add((int(rng.choice(layers[k - 2])), v))
    # nodes without children in non-final layers feed a node of the next layer
    for k in range(len(layers) - 1):
        for u in layers[k]:
            if not any(e[0] == u for e in edges):
                edges.add((u, int(rng.choice(layers[k + 1]))))
    return sorted(edges)


def write_app(name, n, seed):
    rng = np.random.default_rng(seed)
    et = np.round(rng.uniform(20, 160, size=n), 1)
    doc = {
        "name": name,
        "microservices": [{"id": i, "et_ms": float(et[i])} for i in range(n)],
        "edges": [list(e) for e in layered_dag(n, rng)],
    }
    (ROOT / "apps" / f"{name}.json").write_text(json.dumps(doc, indent=1) + "\n")


def write_trace(name, counts, header="requests"):
    body = "\n".join(str(int(c)) for c in counts)
    (ROOT / "traces" / f"{name}.txt").write_text(f"{header}\n{body}\n")


def diurnal(units, base, amp, noise, seed, bursts=0):
    rng = np.random.default_rng(seed)
    t = np.arange(units)
    day = 480
    shape = base + amp * (0.5 - 0.5 * np.cos(2 * math.pi * (t % day) / day))
    counts = shape * rng.lognormal(0.0, noise, size=units)
    for _ in range(bursts):
        start = int(rng.integers(0, units - 10))
        counts[start:start + int(rng.integers(2, 8))] *= rng.uniform(1.5, 2.5)
    return np.maximum(0, np.round(counts)).astype(int)


def scenario(name, app, trace, **extra):
    doc = {"id": name, "app": f"../apps/{app}.json", "trace": f"../traces/{trace}.txt"}
    doc.update(extra)
    (ROOT / "scenarios" / f"{name}.json").write_text(json.dumps(doc, indent=1) + "\n")


def main():
    for sub in ("apps", "traces", "scenarios"):
        (ROOT / sub).mkdir(parents=True, exist_ok=True)

    toy = {
        "name": "toy-chain",
        "microservices": [{"id": i, "et_ms": et} for i, et in enumerate([120.0, 200.0, 80.0, 150.0, 100.0])],
        "edges": [[0, 1], [1, 2], [2, 3], [3, 4]],
    }
    (ROOT / "apps" / "toy-chain.json").write_text(json.dumps(toy, indent=1) + "\n")
    toy_counts = [400] * 8 + [1000] * 4 + [1600] * 6 + [500] * 6 + [1600] * 8 + [700] * 8
    write_trace("toy-bursty", toy_counts)
    write_trace("zero-40", [0] * 40)

    for name, n, seed in (("a11", 11, 11), ("a12", 12, 12), ("a13", 13, 13), ("a14", 14, 14), ("a30", 30, 30)):
        write_app(name, n, seed)

    write_trace("nasa-synth", diurnal(960, 60, 240, 0.15, 7, bursts=6))
    write_trace("alibaba-synth", diurnal(960, 120, 180, 0.25, 8, bursts=12))

    # 3 idle m5.4xlarge for 40 steps of 180 s cost 4.608; budget is twice that
    scenario("toy", "toy-chain", "toy-bursty", budget_usd=9.216, rho=100)
    scenario("toy-zero", "toy-chain", "zero-40", budget_usd=9.216, rho=100)
    for app in ("a11", "a12", "a13", "a14"):
        scenario(f"nasa-{app[1:]}", app, "nasa-synth", train_units=480, budget_usd=200, rho=100)
    scenario("alibaba-30", "a30", "alibaba-synth", train_units=480, budget_usd=200, rho=100)


if __name__ == "__main__":
    main()
