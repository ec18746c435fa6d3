# Copyright 2026 The xres Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Independent numpy implementation of the template noise-model Monte Carlo.

Re-derives the counter RNG from its definition in include/xres/rng.hpp and
the simulation from simulate_noise_model's documented stream layout, then
writes tests/golden/noise_model.json for the acceptance suite.

    python3 tools/oracles/noise_model_oracle.py [--out PATH]
"""

import argparse
import json

import numpy as np

M64 = np.uint64(0xFFFFFFFFFFFFFFFF)
GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def mix(z):
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def key(seed, path):
    """path entries may be arrays; broadcasting yields one key per element."""
    k = mix(np.uint64(seed))
    for p in path:
        with np.errstate(over="ignore"):
            k = mix(k ^ mix(np.asarray(p, dtype=np.uint64) + GOLDEN))
    return k


def draws(keys, first, count):
    """u64 draws #first..#first+count-1 (1-based counters) for every key."""
    n = np.arange(first, first + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix(keys[:, None] + n[None, :] * GOLDEN)


def uniforms(u):
    return (u >> np.uint64(11)).astype(np.float64) * 2.0**-53


def normals(keys, first, count):
    u = uniforms(draws(keys, first, 2 * count))
    u1 = 1.0 - u[:, 0::2]
    u2 = u[:, 1::2]
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def centre_norm(x):
    c = x - x.mean(axis=1, keepdims=True)
    n = np.linalg.norm(c, axis=1, keepdims=True)
    return np.where(n < 1e-12, 0.0, c / np.where(n < 1e-12, 1.0, n))


def simulate(n=100, d=256, sigma=0.6, scales=3, trials=2000, seed=0):
    ids = normals(key(seed, [0, np.arange(n, dtype=np.uint64)]), 1, d)
    ids /= np.linalg.norm(ids, axis=1, keepdims=True)
    ref = centre_norm(ids)

    tkeys = key(seed, [1, np.arange(trials, dtype=np.uint64)])
    subject = (draws(tkeys, 1, 1)[:, 0] % np.uint64(n)).astype(np.int64)
    noise = normals(tkeys, 2, scales * d).reshape(trials, scales, d) * sigma
    tmpl = ids[subject][:, None, :] + noise

    def accuracy(t):
        pred = np.argmax(centre_norm(t) @ ref.T, axis=1)  # first maximum wins
        return float(np.mean(pred == subject))

    return accuracy(tmpl[:, 0, :]), accuracy(tmpl.sum(axis=1))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="tests/golden/noise_model.json")
    ap.add_argument("--runs", type=int, default=50)
    args = ap.parse_args()
    params = {"num_subjects": 100, "dim": 256, "noise_sigma": 0.6, "num_scales": 3,
              "trials": 2000}
    runs = []
    for seed in range(1, args.runs + 1):
        single, acc = simulate(100, 256, 0.6, 3, 2000, seed)
        runs.append({"seed": seed, "single_scale_accuracy": single,
                     "accumulated_accuracy": acc})
    sweep = []
    for sigma in [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]:
        single, acc = simulate(100, 256, sigma, 3, 2000, 0)
        sweep.append({"sigma": sigma, "single_scale_accuracy": single,
                      "accumulated_accuracy": acc})
    with open(args.out, "w") as f:
        json.dump({"params": params, "runs": runs, "sweep_seed0": sweep}, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
