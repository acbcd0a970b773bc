#!/usr/bin/env python3
# Copyright 2026 The wgq Authors
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

# Independent high-precision evaluation of the single-emitter reflection
# amplitude and derived quantities. Values printed here are frozen into the
# C++ unit and acceptance tests; rerun to audit them.
import mpmath as mp

mp.mp.dps = 40


def refl(purcell, detuning):
    inv_p = mp.mpf(0) if purcell is None else 1 / mp.mpf(purcell)
    return -1 / (1 - 2j * mp.mpf(detuning) + inv_p)


def show(label, value):
    print(f"{label:<34} {mp.nstr(value, 20)}")


for p, d in [(100, "0.1"), (10, 0), (100, 0), (100, "0.15"), (50, "0.13"), (10, "0.15")]:
    r = refl(p, d)
    show(f"|r|^2 P={p} d={d}", abs(r) ** 2)
    show(f"loss  P={p} d={d}", 1 - abs(r) ** 2 - abs(r + 1) ** 2)

for n in (2, 3, 5, 10):
    for p, d in [(100, 0), (100, "0.15"), (10, 0)]:
        show(f"|r|^(2N) N={n} P={p} d={d}", abs(refl(p, d)) ** (2 * n))

theta = mp.acos(1 / mp.sqrt(3)) / 2
show("prep angle deg", theta * 180 / mp.pi)
show("HWP(prep)|H> H amp", mp.cos(2 * theta))
show("HWP(prep)|H> V amp", mp.sin(2 * theta))
show("HWP(27.4)|H> H amp", mp.cos(2 * mp.radians(mp.mpf("27.4"))))
