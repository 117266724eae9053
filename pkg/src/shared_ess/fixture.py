"""Synthetic three-user, one-week (168 hourly slots) demonstration data.

Slot 1 is 00:00-01:00 on a Sunday.  All values are kW (one slot = one hour),
computed from closed-form shapes so the bundled CSV files can be regenerated
exactly.  With ``h`` the 0-based slot, ``k = h % 24`` the hour of day and
``d = h // 24`` the day::

    bump(k, c, w)  = exp(-((k - c) / w)**2)
    sun(k)         = max(0, sin(pi * (k - 7) / 10))          # light 07:00-17:00
    solar(h)       = cloud[d] * sun(k)
    wind_m(h)      = clip(0.45 + 0.35 sin(2 pi h / 41 + p_m)
                               + 0.2 sin(2 pi h / 13 + 2 p_m), 0, 1)

    apartment      = 22 + 14 bump(k, 7.5, 1.5) + 38 bump(k, 19.5, 2.5)   (x1.1 weekends)
    office         = 18 + 95 * office_hours(k)  on weekdays, 18 on weekends
                     office_hours = ramp over 07-09, flat to 17, ramp down to 19
    restaurant     = 8 + 40 bump(k, 12.5, 1.5) + 55 bump(k, 19, 2)

Users own solar and wind capacity (kW peak): apartment 35 / 70, office 140 / 25,
restaurant 25 / 60, with wind phases p = 0, 2.1, 4.2.  The low-diversity variant
replaces each user's wind by extra solar of equal weekly energy.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

NUM_SLOTS = 168
USERS = ("apartment", "office", "restaurant")
CLOUD = (0.9, 0.45, 1.0, 0.7, 0.95, 0.35, 0.85)
SOLAR_KW = (35.0, 140.0, 25.0)
WIND_KW = (70.0, 25.0, 60.0)
WIND_PHASE = (0.0, 2.1, 4.2)


def _bump(k, centre, width):
    return np.exp(-(((k - centre) / width) ** 2))


def _hours(num_slots=NUM_SLOTS):
    h = np.arange(num_slots)
    return h, h % 24, h // 24


def solar_shape(num_slots=NUM_SLOTS) -> np.ndarray:
    _, k, d = _hours(num_slots)
    sun = np.maximum(0.0, np.sin(math.pi * (k - 7) / 10.0))
    sun[(k < 7) | (k > 17)] = 0.0
    return np.array(CLOUD)[d % 7] * sun


def wind_shape(phase: float, num_slots=NUM_SLOTS) -> np.ndarray:
    h, _, _ = _hours(num_slots)
    w = 0.45 + 0.35 * np.sin(2 * math.pi * h / 41 + phase) + 0.2 * np.sin(2 * math.pi * h / 13 + 2 * phase)
    return np.clip(w, 0.0, 1.0)


def loads(num_slots=NUM_SLOTS) -> np.ndarray:
    _, k, d = _hours(num_slots)
    weekday = (6 + d) % 7          # Monday = 0, slot 1 falls on a Sunday
    weekend = weekday >= 5
    apt = 22 + 14 * _bump(k, 7.5, 1.5) + 38 * _bump(k, 19.5, 2.5)
    apt = np.where(weekend, 1.1 * apt, apt)
    hours = np.clip((k - 7) / 2.0, 0, 1) * np.clip((19 - k) / 2.0, 0, 1)
    office = 18 + np.where(weekend, 0.0, 95 * hours)
    rest = 8 + 40 * _bump(k, 12.5, 1.5) + 55 * _bump(k, 19, 2)
    return np.vstack([apt, office, rest])


def generation(diverse: bool = True, num_slots=NUM_SLOTS) -> np.ndarray:
    sol = solar_shape(num_slots)
    rows = []
    for sk, wk, ph in zip(SOLAR_KW, WIND_KW, WIND_PHASE):
        wind = wk * wind_shape(ph, num_slots)
        if diverse:
            rows.append(sk * sol + wind)
        else:
            rows.append((sk + wind.sum() / sol.sum()) * sol)
    return np.vstack(rows)


def write_profiles(path: Path, diverse: bool = True) -> None:
    L = loads()
    R = generation(diverse)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["slot", "user_id", "load_kw", "generation_kw"])
        for m in range(L.shape[0]):
            for n in range(L.shape[1]):
                w.writerow([n + 1, m + 1, f"{L[m, n]:.6f}", f"{R[m, n]:.6f}"])


def data_dir() -> Path:
    return Path(__file__).parent / "data"


def fixture_config(variant: str = "diverse") -> Path:
    """Path of a bundled config: ``"diverse"`` (solar + wind) or ``"solar"``."""
    name = {"diverse": "fixture.yaml", "solar": "fixture_solar_only.yaml"}[variant]
    return data_dir() / name


if __name__ == "__main__":
    out = data_dir()
    out.mkdir(exist_ok=True)
    write_profiles(out / "profiles.csv", diverse=True)
    write_profiles(out / "profiles_solar_only.csv", diverse=False)
