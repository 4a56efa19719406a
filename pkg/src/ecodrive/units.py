"""Unit helpers. Internally everything is SI (m, s, kg, N, rad); engine maps
speak rpm and g/s, route files and external interfaces speak km/h."""

KMH_PER_MS = 3.6


def kmh_to_ms(v: float) -> float:
    return v / KMH_PER_MS


def ms_to_kmh(v: float) -> float:
    return v * KMH_PER_MS
