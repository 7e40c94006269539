"""Numerical tolerances shared by every module.

Tolerances live in a context variable so overrides are scoped and
thread-safe::

    with tolerances(tol_eig=1e-14):
        von_neumann_entropy(rho)
"""
from __future__ import annotations

import contextlib
import contextvars
import dataclasses
import json
import os
from dataclasses import dataclass

CONFIG_ENV_VAR = "CHICAP_CONFIG"


@dataclass(frozen=True)
class Tolerances:
    tol_herm: float = 1e-9
    tol_psd: float = 1e-9
    tol_trace: float = 1e-9
    tol_eig: float = 1e-12
    tol_supp: float = 1e-9
    tol_prob: float = 1e-9
    tol_weight: float = 1e-12
    tol_tp: float = 1e-9
    tol_kraus_rank: float = 1e-10
    tol_energy: float = 1e-10
    tol_channel: float = 1e-9
    tol_rank: float = 1e-10
    tol_gauss_psd: float = 1e-10
    cert_tol: float = 1e-6
    slackness_tol: float = 1e-6
    interior_eps: float = 1e-9

    def replace(self, **overrides) -> "Tolerances":
        unknown = set(overrides) - {f.name for f in dataclasses.fields(self)}
        if unknown:
            raise KeyError(f"unknown tolerance key(s): {sorted(unknown)}")
        return dataclasses.replace(self, **{k: float(v) for k, v in overrides.items()})

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_current = contextvars.ContextVar("chicap_tolerances", default=Tolerances())


def get_tolerances() -> Tolerances:
    return _current.get()


def set_tolerances(tols: Tolerances) -> None:
    _current.set(tols)


@contextlib.contextmanager
def tolerances(**overrides):
    token = _current.set(_current.get().replace(**overrides))
    try:
        yield _current.get()
    finally:
        _current.reset(token)


def load_config(path: str | os.PathLike | None = None) -> dict:
    """Read a JSON config file; falls back to ``$CHICAP_CONFIG`` or ``{}``."""
    path = path or os.environ.get(CONFIG_ENV_VAR)
    if not path:
        return {}
    with open(path) as fh:
        return json.load(fh)


def tolerances_from_config(config: dict, base: Tolerances | None = None) -> Tolerances:
    base = base or Tolerances()
    section = config.get("numerics", {}).get("tolerances", {})
    return base.replace(**section) if section else base
