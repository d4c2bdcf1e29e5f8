"""Named parameter recipes for the reference figures and tables.

``preset(name)`` returns a plain dict. ``map`` holds a :class:`MapParams`
(or is absent for memristor-only recipes); other keys depend on the recipe.
Recipes with several rows carry a ``rows`` list of per-row overrides.
"""

from __future__ import annotations

import copy

from .core import FIRING_PATTERNS, MapParams

_TABLE1 = dict(k0=0.01, k1=0.5, k2=0.5, k=-0.1)
_FIRING = dict(k0=0.1, k1=0.1, k2=0.2)
_CORR = dict(k0=-0.7, k1=0.1, k2=0.2, r=1.03)
TABLE3_K = (1.61, 1.62, 1.698, 1.748)
TABLE3_DIMENSION = (1.1705, 1.1882, 1.3310, 1.4358)
_STAR = dict(k0=2.0, k1=0.3, k2=0.5, k=-0.5)


def _m(**kw) -> MapParams:
    return MapParams(**kw)


_PRESETS = {
    "fig4a": dict(kind="phl", k1=0.7, k2=0.2, v_m=1.0, omega=3.7, phi0=0.0),
    "fig4b": dict(kind="phl", k1=0.7, k2=0.2, v_m=1.3, omega=3.4, phi0=0.0),
    "fig5a": dict(kind="phl", k1=0.7, k2=0.2, omega=3.7, phi0=0.0, v_m_grid=(0.6, 0.8, 1.0)),
    "fig5b": dict(kind="phl", k1=0.7, k2=0.2, v_m=1.0, phi0=0.0, omega_grid=(3.7, 4.5, 5.5)),
    "table1-r2": dict(kind="fixed-points", map=_m(**_TABLE1, r=2.0), x_lo=-1.0, x_hi=10.0),
    "table1-r2.8": dict(kind="fixed-points", map=_m(**_TABLE1, r=2.8), x_lo=-1.0, x_hi=10.0),
    "table1-r3": dict(kind="fixed-points", map=_m(**_TABLE1, r=3.0), x_lo=-1.0, x_hi=10.0),
    "table1-r5": dict(kind="fixed-points", map=_m(**_TABLE1, r=5.0), x_lo=-1.0, x_hi=10.0),
    "fig7": dict(kind="sweep", map=_m(k0=1.0, k1=0.1, k2=0.5, k=0.3, r=2.5), param="r",
                 start=2.5, end=3.1, steps=600, transient=2000, record=200),
    "fig10": dict(kind="basin", map=_m(k0=0.06, k1=0.1, k2=0.2, k=0.53, r=2.7)),
    "table3": dict(kind="corrdim", map=_m(**_CORR, k=TABLE3_K[-1]), k_values=TABLE3_K,
                   reference=TABLE3_DIMENSION),
    "fig15-row1": dict(kind="network", map=_m(**_STAR, r=1.2), sigma=0.01, mu=0.0),
    "fig15-row2": dict(kind="network", map=_m(**_STAR, r=1.2), sigma=0.057, mu=0.0),
    "fig15-row3": dict(kind="network", map=_m(**_STAR, r=1.2), sigma=0.1, mu=0.0),
    "fig16-rows": dict(kind="network", map=_m(k0=0.7, k1=0.8215, k2=-0.39, k=-0.2, r=2.15),
                       rows=[dict(mu=0.00007, sigma=0.16), dict(mu=0.00001, sigma=0.15),
                             dict(mu=0.0001, sigma=0.14)]),
    "fig17-rows": dict(kind="network", map=_m(**_STAR, r=1.2), sigma=0.0,
                       rows=[dict(mu=0.001, r=1.2), dict(mu=0.0007, r=1.0),
                             dict(mu=0.0003, r=0.98), dict(mu=0.0001, r=0.8)]),
    "fig18": dict(kind="network", map=_m(k0=0.5, k1=0.1, k2=0.03, k=0.1, r=2.15), sigma=0.41, mu=0.0004),
    "fig19-cluster": dict(kind="network", map=_m(k0=0.8, k1=0.3, k2=0.5, k=-0.7, r=1.3), sigma=0.01, mu=0.0),
    "fig19-imperfect": dict(kind="network", map=_m(k0=0.8, k1=0.3, k2=0.5, k=-0.5, r=1.243), sigma=0.0, mu=0.0001),
}

for _letter, _name in zip("abcde", FIRING_PATTERNS):
    _PRESETS[f"fig13{_letter}"] = dict(kind="firing", map=_m(**_FIRING, **FIRING_PATTERNS[_name]), pattern=_name)
for _letter, _k in zip("abcd", TABLE3_K):
    _PRESETS[f"fig14{_letter}"] = dict(kind="corrdim", map=_m(**_CORR, k=_k))

#: Parameter sets with a supercritical Neimark-Sacker point in k.
#: Each entry is (base params with k near k', fixed-point x guess).
NS_CASES = (
    (MapParams(k0=0.043, k1=0.289, k2=0.741, k=0.2, r=1.688), 2.741),
    (MapParams(k0=0.354, k1=0.271, k2=0.536, k=0.275, r=1.604), 2.771),
    (MapParams(k0=0.273, k1=0.283, k2=0.25, k=0.405, r=1.521), 2.461),
    (MapParams(k0=0.452, k1=0.661, k2=0.336, k=-0.114, r=1.746), 3.016),
    (MapParams(k0=0.01, k1=0.5, k2=0.5, k=-0.1, r=2.2139169367114495), 3.577),
)


def preset_names() -> list[str]:
    return sorted(_PRESETS)


def preset(name: str) -> dict:
    if name not in _PRESETS:
        raise KeyError(f"unknown preset {name!r}")
    return copy.deepcopy(_PRESETS[name])


def row_params(base: dict, row: dict) -> tuple[MapParams, dict]:
    """Apply one ``rows`` entry: map-parameter keys go to the map, the rest to coupling."""
    fields = set(MapParams.__dataclass_fields__)
    p = base["map"].with_(**{k: v for k, v in row.items() if k in fields})
    extra = {k: v for k, v in row.items() if k not in fields}
    return p, extra
