"""Plain-text configuration schema (INI sections of key = value pairs).

A full experiment file looks like::

    [system]
    kind = baker
    alpha = 0.25
    lam_a = 0.3
    lam_b = 0.2

    [observable]
    kind = mean2d

    [target]
    f0 = 0.3
    metric = euclidean

    [run]
    method = dimension
    orbit_length = 10000000
    block_size = 5000
    trials = 10
    seed = 7

Nested specs use dotted subsections: ``[system.noise]`` (and
``[system.noise.variant<i>]`` for map switching), ``[observable.base]`` for
delay observables, ``[observable.part<i>]`` for vector observables,
``[observable.noise]``.  Floats are written with ``repr`` so a round trip
through a file reproduces the exact binary values.
"""

from __future__ import annotations

import configparser
from typing import Optional

import numpy as np

from dynevt import observables as obsmod
from dynevt import systems as sysmod
from dynevt.observables import TargetSpec

_SYSTEM_KINDS = {
    "linear_circle": sysmod.LinearCircle,
    "two_branch_affine_circle": sysmod.TwoBranchAffineCircle,
    "hemmer": sysmod.Hemmer,
    "baker": sysmod.Baker,
    "cantor_ifs_1d": sysmod.CantorIFS1D,
    "cantor_product_2d": sysmod.CantorProduct2D,
    "lorenz_euler": sysmod.LorenzEuler,
}
_SYSTEM_NAMES = {v: k for k, v in _SYSTEM_KINDS.items()}

_OBS_KINDS = {
    "identity": obsmod.Identity,
    "coordinate": obsmod.Coordinate,
    "mean2d": obsmod.Mean2D,
    "affine": obsmod.Affine,
    "gaussian2d": obsmod.Gaussian2D,
    "power": obsmod.Power,
    "quadratic_roots": obsmod.QuadraticRoots,
    "piecewise_affine": obsmod.PiecewiseAffine,
    "distance_to_line": obsmod.DistanceToLine,
    "distance_to_circle": obsmod.DistanceToCircle,
    "vector_list": obsmod.VectorList,
    "delay": obsmod.Delay,
    "spatial_mean": obsmod.SpatialMean,
}
_OBS_NAMES = {v: k for k, v in _OBS_KINDS.items()}


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "on" if x else "off"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _fmt_list(xs) -> str:
    return ", ".join(_fmt(x) for x in xs)


def _floats(s: str) -> tuple:
    return tuple(float(v.strip()) for v in s.split(",") if v.strip())


def new_config() -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    cp.optionxform = str  # keep key case
    return cp


# ---------------------------------------------------------------------------
# systems
# ---------------------------------------------------------------------------


def system_to_config(sys, cp: configparser.ConfigParser, section: str = "system"):
    cp[section] = {}
    sec = cp[section]
    sec["kind"] = _SYSTEM_NAMES[type(sys)]
    if isinstance(sys, sysmod.LinearCircle):
        sec["m"] = str(sys.m)
        sec["jitter"] = "auto" if sys.jitter is None else _fmt(sys.jitter)
    elif isinstance(sys, sysmod.TwoBranchAffineCircle):
        sec["slopes"] = _fmt_list(sys.slopes)
        sec["offsets"] = _fmt_list(sys.offsets)
        sec["jitter"] = _fmt(sys.jitter)
    elif isinstance(sys, sysmod.Baker):
        sec["alpha"] = _fmt(sys.alpha)
        sec["lam_a"] = _fmt(sys.lam_a)
        sec["lam_b"] = _fmt(sys.lam_b)
    elif isinstance(sys, (sysmod.CantorIFS1D, sysmod.CantorProduct2D)):
        sec["ratios"] = _fmt_list(sys.ratios)
        sec["weights"] = _fmt_list(sys.weights)
    elif isinstance(sys, sysmod.LorenzEuler):
        sec["sigma"] = _fmt(sys.sigma)
        sec["rho"] = _fmt(sys.rho)
        sec["beta"] = _fmt(sys.beta)
        sec["h"] = _fmt(sys.h)
    if getattr(sys, "noise", None) is not None:
        _noise_to_config(sys.noise, cp, f"{section}.noise")


def _noise_to_config(noise, cp, section):
    cp[section] = {}
    if isinstance(noise, sysmod.AdditiveUniformMod1):
        cp[section]["kind"] = "additive_uniform_mod1"
        cp[section]["eta"] = _fmt(noise.eta)
    else:
        cp[section]["kind"] = "discrete_map_switch"
        cp[section]["probs"] = _fmt_list(noise.probs)
        for i, v in enumerate(noise.variants, start=1):
            system_to_config(v, cp, f"{section}.variant{i}")


def system_from_config(cp: configparser.ConfigParser, section: str = "system"):
    sec = cp[section]
    kind = sec["kind"].strip()
    if kind not in _SYSTEM_KINDS:
        raise ValueError(f"unknown system kind {kind!r}")
    noise = _noise_from_config(cp, f"{section}.noise") if cp.has_section(f"{section}.noise") else None
    if kind == "linear_circle":
        j = sec.get("jitter", "auto").strip()
        jitter = None if j == "auto" else j == "on"
        return sysmod.LinearCircle(m=int(sec["m"]), jitter=jitter, noise=noise)
    if kind == "two_branch_affine_circle":
        return sysmod.TwoBranchAffineCircle(
            slopes=_floats(sec["slopes"]),
            offsets=_floats(sec["offsets"]),
            jitter=sec.get("jitter", "off").strip() == "on",
            noise=noise,
        )
    if kind == "hemmer":
        return sysmod.Hemmer(noise=noise)
    if kind == "baker":
        return sysmod.Baker(
            alpha=float(sec["alpha"]),
            lam_a=float(sec["lam_a"]),
            lam_b=float(sec["lam_b"]),
            noise=noise,
        )
    if kind == "cantor_ifs_1d":
        return sysmod.CantorIFS1D(
            ratios=_floats(sec["ratios"]), weights=_floats(sec["weights"]), noise=noise
        )
    if kind == "cantor_product_2d":
        return sysmod.CantorProduct2D(
            ratios=_floats(sec["ratios"]), weights=_floats(sec["weights"]), noise=noise
        )
    return sysmod.LorenzEuler(
        sigma=float(sec["sigma"]),
        rho=float(sec["rho"]),
        beta=float(sec["beta"]),
        h=float(sec["h"]),
        noise=noise,
    )


def _noise_from_config(cp, section):
    sec = cp[section]
    kind = sec["kind"].strip()
    if kind == "additive_uniform_mod1":
        return sysmod.AdditiveUniformMod1(eta=float(sec["eta"]))
    if kind == "discrete_map_switch":
        probs = _floats(sec["probs"])
        variants = []
        for i in range(1, len(probs) + 1):
            variants.append(system_from_config(cp, f"{section}.variant{i}"))
        return sysmod.DiscreteMapSwitch(variants=tuple(variants), probs=probs)
    raise ValueError(f"unknown noise kind {kind!r}")


# ---------------------------------------------------------------------------
# observables
# ---------------------------------------------------------------------------


def observable_to_config(obs, cp: configparser.ConfigParser, section: str = "observable"):
    cp[section] = {}
    sec = cp[section]
    sec["kind"] = _OBS_NAMES[type(obs)]
    if isinstance(obs, obsmod.Coordinate):
        sec["index"] = str(obs.index)
    elif isinstance(obs, obsmod.Affine):
        sec["a"], sec["b"], sec["c"] = _fmt(obs.a), _fmt(obs.b), _fmt(obs.c)
    elif isinstance(obs, obsmod.Gaussian2D):
        sec["x0"], sec["y0"] = _fmt(obs.x0), _fmt(obs.y0)
    elif isinstance(obs, obsmod.Power):
        sec["a"] = _fmt(obs.a)
    elif isinstance(obs, obsmod.PiecewiseAffine):
        for i, b in enumerate(obs.branches, start=1):
            sec[f"branch{i}"] = _fmt_list((b.lo, b.hi, b.slope, b.intercept))
    elif isinstance(obs, obsmod.DistanceToLine):
        sec["a"], sec["b"], sec["c"] = _fmt(obs.a), _fmt(obs.b), _fmt(obs.c)
    elif isinstance(obs, obsmod.DistanceToCircle):
        sec["cx"], sec["cy"] = _fmt(obs.cx), _fmt(obs.cy)
        sec["radius"] = _fmt(obs.radius)
    elif isinstance(obs, obsmod.VectorList):
        sec["parts"] = str(len(obs.parts))
        for i, p in enumerate(obs.parts, start=1):
            observable_to_config(p, cp, f"{section}.part{i}")
    elif isinstance(obs, obsmod.Delay):
        sec["k"] = str(obs.k)
        observable_to_config(obs.base, cp, f"{section}.base")
    if obs.noise is not None:
        _obs_noise_to_config(obs.noise, cp, f"{section}.noise")


def _obs_noise_to_config(noise, cp, section):
    cp[section] = {}
    if isinstance(noise, obsmod.AdditiveUniform):
        cp[section]["kind"] = "additive_uniform"
        cp[section]["eta"] = _fmt(noise.eta)
    else:
        cp[section]["kind"] = "discrete_shift"
        cp[section]["shifts"] = _fmt_list(noise.shifts)
        cp[section]["probs"] = _fmt_list(noise.probs)


def observable_from_config(cp: configparser.ConfigParser, section: str = "observable"):
    sec = cp[section]
    kind = sec["kind"].strip()
    if kind not in _OBS_KINDS:
        raise ValueError(f"unknown observable kind {kind!r}")
    noise = (
        _obs_noise_from_config(cp, f"{section}.noise")
        if cp.has_section(f"{section}.noise")
        else None
    )
    if kind == "coordinate":
        return obsmod.Coordinate(index=int(sec["index"]), noise=noise)
    if kind == "affine":
        return obsmod.Affine(
            a=float(sec["a"]), b=float(sec["b"]), c=float(sec["c"]), noise=noise
        )
    if kind == "gaussian2d":
        return obsmod.Gaussian2D(x0=float(sec["x0"]), y0=float(sec["y0"]), noise=noise)
    if kind == "power":
        return obsmod.Power(a=float(sec["a"]), noise=noise)
    if kind == "piecewise_affine":
        branches = []
        i = 1
        while f"branch{i}" in sec:
            lo, hi, slope, intercept = _floats(sec[f"branch{i}"])
            branches.append(obsmod.Branch(lo, hi, slope, intercept))
            i += 1
        return obsmod.PiecewiseAffine(branches=tuple(branches), noise=noise)
    if kind == "distance_to_line":
        return obsmod.DistanceToLine(
            a=float(sec["a"]), b=float(sec["b"]), c=float(sec["c"]), noise=noise
        )
    if kind == "distance_to_circle":
        return obsmod.DistanceToCircle(
            cx=float(sec["cx"]), cy=float(sec["cy"]), radius=float(sec["radius"]), noise=noise
        )
    if kind == "vector_list":
        nparts = int(sec["parts"])
        parts = tuple(
            observable_from_config(cp, f"{section}.part{i}") for i in range(1, nparts + 1)
        )
        return obsmod.VectorList(parts=parts, noise=noise)
    if kind == "delay":
        base = observable_from_config(cp, f"{section}.base")
        return obsmod.Delay(base=base, k=int(sec["k"]), noise=noise)
    return _OBS_KINDS[kind](noise=noise)


def _obs_noise_from_config(cp, section):
    sec = cp[section]
    kind = sec["kind"].strip()
    if kind == "additive_uniform":
        return obsmod.AdditiveUniform(eta=float(sec["eta"]))
    if kind == "discrete_shift":
        return obsmod.DiscreteShift(shifts=_floats(sec["shifts"]), probs=_floats(sec["probs"]))
    raise ValueError(f"unknown observable noise kind {kind!r}")


# ---------------------------------------------------------------------------
# targets and whole files
# ---------------------------------------------------------------------------


def target_to_config(target: TargetSpec, cp, section: str = "target"):
    cp[section] = {}
    sec = cp[section]
    if target.z is not None:
        z = np.atleast_1d(np.asarray(target.z, dtype=float))
        sec["z"] = _fmt_list(z)
    if target.f0 is not None:
        f0 = np.atleast_1d(np.asarray(target.f0, dtype=float))
        sec["f0"] = _fmt_list(f0)
    sec["metric"] = target.metric


def target_from_config(cp, section: str = "target") -> TargetSpec:
    sec = cp[section]
    z = _floats(sec["z"]) if "z" in sec else None
    f0 = _floats(sec["f0"]) if "f0" in sec else None
    if z is not None and len(z) == 1:
        z = (z[0],)
    return TargetSpec(
        z=z if z is None else tuple(z),
        f0=f0 if f0 is None else tuple(f0),
        metric=sec.get("metric", "euclidean").strip(),
    )


def write_config(path, cp: configparser.ConfigParser):
    with open(path, "w") as fh:
        cp.write(fh)


def load_config(path) -> configparser.ConfigParser:
    cp = new_config()
    with open(path) as fh:
        cp.read_file(fh)
    return cp
