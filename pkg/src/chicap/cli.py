"""Command-line interface: ``chicap <command> [options]``.

Each command writes one JSON (or CSV) report. Exit status is 0 on
success, 2 on validation failure and 3 when an optimizer did not converge.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from . import __version__
from ._config import Tolerances, load_config, set_tolerances, tolerances_from_config, get_tolerances
from .capacity import (
    ConstraintSpec,
    capacity_gap,
    channel_mutual_information,
    chi_capacity,
    ci_via_chi,
    coherent_information,
    ea_capacity,
)
from .ensembles import check_disturbance_identity, chi_quantity, disturbance_bound, entropic_disturbance, image
from .fixtures import CHANNEL_PRESETS, ENSEMBLE_PRESETS, channel_preset, ensemble_preset
from .gaussian import GaussianChannelSpec, classify_gap, validate
from .io import (
    SCHEMA_VERSION,
    SchemaError,
    channel_from_dict,
    dumps,
    ensemble_from_dict,
    load_json,
    locate,
    matrix_from_json,
    to_jsonable,
    vector_from_json,
)
from .numerics import gibbs_state, von_neumann_entropy
from .semicontinuity_lab import appendix_identity_sweep, truncation_sweep
from .validation import InfeasibleConstraintError, NotApplicableError, ValidationError

EXIT_OK, EXIT_INVALID, EXIT_NOT_CONVERGED = 0, 2, 3
LN2 = float(np.log(2))


class NotConverged(RuntimeError):
    pass


@dataclass
class RunConfig:
    """Everything a run depends on; identical configs give identical reports."""

    command: str
    channel: str | None = None
    ensemble: str | None = None
    state: str | None = None
    hamiltonian: str | None = None
    energy: float | None = None
    dim: int = 2
    dims: str | None = None
    ranks: str | None = None
    ranks_b: str | None = None
    ranks_e: str | None = None
    gaussian: str | None = None
    unit: str = "nats"
    seed: int = 0
    restarts: int = 16
    out: str | None = None
    format: str = "json"
    tol: list = field(default_factory=list)
    config: str | None = None
    trace: bool = False


def _located(path, fn, *args):
    """Run a schema conversion on the JSON at ``path``, adding ``file:line:col`` to errors."""
    try:
        return fn(*args)
    except SchemaError as exc:
        msg = str(exc)
        where = msg.split(":", 1)[0]
        raise SchemaError(f"{locate(path, where)}: {msg}") from exc


# -- input loading ---------------------------------------------------------


def _load_channel(arg, dim):
    if arg is None:
        raise ValidationError("--channel is required")
    if arg in CHANNEL_PRESETS and not os.path.exists(arg):
        return channel_preset(arg, dim)
    return _located(arg, channel_from_dict, load_json(arg))


def _load_ensemble(arg):
    if arg is None:
        raise ValidationError("--ensemble is required")
    if arg in ENSEMBLE_PRESETS and not os.path.exists(arg):
        return ensemble_preset(arg)
    return _located(arg, ensemble_from_dict, load_json(arg))


def _load_matrix_arg(arg, name):
    if arg is None:
        raise ValidationError(f"--{name} is required")
    if arg.startswith("diag:"):
        try:
            return np.diag([float(x) for x in arg[5:].split(",")]).astype(complex)
        except ValueError as exc:
            raise SchemaError(f"--{name}: bad diagonal {arg!r}") from exc
    return _located(arg, _matrix_document, load_json(arg), name, arg)


def _matrix_document(data, name, arg):
    if isinstance(data, dict):
        if "pure" in data:
            psi = vector_from_json(data["pure"], f"{name}.pure")
            psi = psi / np.linalg.norm(psi)
            return np.outer(psi, psi.conj())
        key = "matrix" if "matrix" in data else "state"
        if key not in data:
            raise SchemaError(f"{arg}: expected a 'matrix', 'state' or 'pure' field")
        return matrix_from_json(data[key], f"{name}.{key}")
    return matrix_from_json(data, name)


def _constraint(args, dim):
    if args.hamiltonian is None and args.energy is None:
        return None
    if args.hamiltonian is None or args.energy is None:
        raise ValidationError("--hamiltonian and --energy must be given together")
    c = ConstraintSpec(_load_matrix_arg(args.hamiltonian, "hamiltonian"), args.energy)
    if c.dim != dim:
        raise ValidationError(f"hamiltonian dimension {c.dim} != channel input {dim}")
    return c


def _ranks(text):
    return [int(x) for x in text.split(",")] if text else None


# -- reporting ---------------------------------------------------------------


def _value(nats, unit):
    return {"nats": nats, "bits": nats / LN2, "value": nats if unit == "nats" else nats / LN2}


def _result_block(res, unit):
    block = {**_value(res.value, unit), "multiplier": res.multiplier, "iterations": res.iterations,
             "converged": res.converged, "energy": res.energy, "optimizer": res.optimizer}
    if res.certificate is not None:
        block["certificate"] = res.certificate.to_dict()
    if res.trace:
        block["trace"] = res.trace
    return block


def _inputs(args):
    keys = ("channel", "ensemble", "state", "hamiltonian", "energy", "dim", "dims", "ranks",
            "ranks_b", "ranks_e", "gaussian", "restarts")
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


# -- commands ----------------------------------------------------------------


def cmd_entropy(args):
    rho = _load_matrix_arg(args.state, "state")
    return {"entropy": _value(von_neumann_entropy(rho), args.unit)}


def cmd_chi(args):
    mu = _load_ensemble(args.ensemble)
    out = {"chi": _value(chi_quantity(mu), args.unit)}
    if args.channel:
        ch = _load_channel(args.channel, mu.dim)
        out["chi_output"] = _value(chi_quantity(image(ch, mu)), args.unit)
    return out


def cmd_disturbance(args):
    mu = _load_ensemble(args.ensemble)
    ch = _load_channel(args.channel, mu.dim)
    value = entropic_disturbance(ch, mu)
    return {
        "disturbance": _value(value, args.unit),
        "chi_input": _value(chi_quantity(mu), args.unit),
        "chi_output": _value(chi_quantity(image(ch, mu)), args.unit),
        "upper_bound": _value(disturbance_bound(ch), args.unit),
    }


def cmd_verify_identity(args):
    mu = _load_ensemble(args.ensemble)
    ch = _load_channel(args.channel, mu.dim)
    check = check_disturbance_identity(ch, mu)
    return {"terms": check._asdict(), "lhs": check.lhs, "rhs": check.rhs, "residual": check.residual,
            "passed": check.residual <= 1e-8}


def cmd_chi_capacity(args):
    ch = _load_channel(args.channel, args.dim)
    res = chi_capacity(ch, _constraint(args, ch.dim_in), restarts=args.restarts, seed=args.seed,
                       record_trace=args.trace)
    report = {"chi_capacity": _result_block(res, args.unit)}
    if not res.converged:
        raise NotConverged(report)
    return report


def cmd_ea_capacity(args):
    ch = _load_channel(args.channel, args.dim)
    res = ea_capacity(ch, _constraint(args, ch.dim_in), record_trace=args.trace)
    report = {"ea_capacity": _result_block(res, args.unit)}
    if not res.converged:
        raise NotConverged(report)
    return report


def cmd_gap(args):
    ch = _load_channel(args.channel, args.dim)
    c = _constraint(args, ch.dim_in)
    if c is None:
        raise ValidationError("gap needs --hamiltonian and --energy")
    rep = capacity_gap(ch, c, restarts=args.restarts, seed=args.seed)
    chi_res, ea_res = rep.pop("chi_result"), rep.pop("ea_result")
    rep["chi_capacity"] = _result_block(chi_res, args.unit)
    rep["ea_capacity"] = _result_block(ea_res, args.unit)
    rep["gap"] = _value(rep["gap"], args.unit)
    if not (chi_res.converged and ea_res.converged):
        raise NotConverged(rep)
    return rep


def cmd_coherent_info(args):
    ch = _load_channel(args.channel, args.dim)
    rho = _load_matrix_arg(args.state, "state")
    ic = coherent_information(ch, rho)
    via = ci_via_chi(ch, rho)
    return {
        "coherent_information": _value(ic, args.unit),
        "via_chi": _value(via, args.unit),
        "route_difference": abs(ic - via),
        "channel_mutual_information": _value(channel_mutual_information(ch, rho), args.unit),
    }


def cmd_sweep_truncation(args):
    mu = _load_ensemble(args.ensemble)
    if not args.dims:
        raise ValidationError("--dims dB,dE is required")
    dims = tuple(int(x) for x in args.dims.split(","))
    ranks = _ranks(args.ranks) or list(range(1, dims[1] + 1))
    report = truncation_sweep(mu, dims, ranks)
    if args.format == "csv":
        return report
    return {"sweep": report.to_dict()}


class _Table:
    def __init__(self, rows, columns):
        self.rows, self.columns = rows, columns

    def to_csv(self):
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=self.columns, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        w.writerows(self.rows)
        return buf.getvalue()


def cmd_sweep_appendix(args):
    mu = _load_ensemble(args.ensemble)
    ch = _load_channel(args.channel, mu.dim)
    d_b, d_e = ch.dim_out, ch.dim_env
    rep = appendix_identity_sweep(ch, mu, _ranks(args.ranks_b) or list(range(1, d_b + 1)),
                                  _ranks(args.ranks_e) or list(range(1, d_e + 1)))
    if args.format == "csv":
        rows = [{"n": f"{r['n_b']}x{r['n_e']}", "dim": r["dim"], "chi_n": r["chi_joint"],
                 "chi_limit": rep["reference"]["chi_input"], "residual": r["residual"]} for r in rep["rows"]]
        return _Table(rows, ["n", "dim", "chi_n", "chi_limit", "residual"])
    return {"sweep": rep}


def cmd_gibbs(args):
    if args.energy is None:
        raise ValidationError("--energy is required")
    h = _load_matrix_arg(args.hamiltonian, "hamiltonian")
    rho, lam = gibbs_state(h, args.energy)
    return {"lambda": lam, "state": rho, "entropy": _value(von_neumann_entropy(rho), args.unit),
            "energy": float(np.trace(h @ rho).real)}


def cmd_gaussian_classify(args):
    if args.gaussian is None:
        raise ValidationError("--gaussian <file> is required")
    data = load_json(args.gaussian)
    try:
        spec = GaussianChannelSpec.from_dict(data)
    except KeyError as exc:
        raise SchemaError(f"{args.gaussian}: missing key {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{args.gaussian}: {exc}") from exc
    ok, mins = validate(spec)
    out = {"valid": ok, "min_eigenvalues": list(mins)}
    if ok:
        out["classification"] = classify_gap(spec)
    return out


def cmd_selftest(args):
    from .selftest import run_selftest

    checks = run_selftest(seed=args.seed)
    report = {"checks": checks, "passed": all(c["passed"] for c in checks)}
    if not report["passed"]:
        raise ValidationError(json.dumps(to_jsonable(report)))
    return report


COMMANDS = {
    "entropy": cmd_entropy,
    "chi": cmd_chi,
    "disturbance": cmd_disturbance,
    "verify-identity": cmd_verify_identity,
    "chi-capacity": cmd_chi_capacity,
    "ea-capacity": cmd_ea_capacity,
    "gap": cmd_gap,
    "coherent-info": cmd_coherent_info,
    "sweep-truncation": cmd_sweep_truncation,
    "sweep-appendix": cmd_sweep_appendix,
    "gibbs": cmd_gibbs,
    "gaussian-classify": cmd_gaussian_classify,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--channel", help="channel JSON file or preset: " + ", ".join(CHANNEL_PRESETS))
    common.add_argument("--ensemble", help="ensemble JSON file or preset: " + ", ".join(ENSEMBLE_PRESETS))
    common.add_argument("--state", help="state JSON file or diag:a,b,...")
    common.add_argument("--hamiltonian", help="Hamiltonian JSON file or diag:a,b,...")
    common.add_argument("--energy", type=float)
    common.add_argument("--dim", type=int, default=2, help="dimension for channel presets")
    common.add_argument("--dims", help="bipartite dims dB,dE")
    common.add_argument("--ranks", help="comma-separated truncation ranks")
    common.add_argument("--ranks-b", dest="ranks_b")
    common.add_argument("--ranks-e", dest="ranks_e")
    common.add_argument("--gaussian", help="Gaussian channel JSON file")
    common.add_argument("--unit", choices=("nats", "bits"), default="nats")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--restarts", type=int, default=16)
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--tol", action="append", default=[], metavar="KEY=VAL")
    common.add_argument("--config", help="JSON config file (default: $CHICAP_CONFIG)")
    common.add_argument("--trace", action="store_true", help="include per-iteration optimizer traces")

    parser = argparse.ArgumentParser(prog="chicap", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _flatten(prefix, obj, out):
    if isinstance(obj, dict):
        for k in sorted(obj):
            _flatten(f"{prefix}.{k}" if prefix else str(k), obj[k], out)
    else:
        out.append((prefix, json.dumps(obj)))


def _render(command, args, payload, tols, status):
    if args.format == "csv":
        if hasattr(payload, "to_csv"):
            return payload.to_csv()
        rows = []
        _flatten("", to_jsonable(payload), rows)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        w.writerows(rows)
        return buf.getvalue()
    report = {
        "schema": SCHEMA_VERSION,
        "command": command,
        "status": status,
        "inputs": _inputs(args),
        "unit": args.unit,
        "seed": args.seed,
        "tolerances": tols.as_dict(),
        "result": payload,
    }
    return dumps(report)


def run(config: RunConfig) -> int:
    """Execute one command and write its report; returns the exit status."""
    args = config
    status, code = "ok", EXIT_OK
    try:
        tols = tolerances_from_config(load_config(args.config), Tolerances())
        overrides = {}
        for item in args.tol:
            key, sep, val = item.partition("=")
            if not sep:
                raise ValidationError(f"--tol expects KEY=VAL, got {item!r}")
            overrides[key] = float(val)
        tols = tols.replace(**overrides)
        set_tolerances(tols)
        payload = COMMANDS[args.command](args)
    except NotConverged as exc:
        payload, status, code = exc.args[0], "not-converged", EXIT_NOT_CONVERGED
    except (ValidationError, InfeasibleConstraintError, NotApplicableError, KeyError, OSError) as exc:
        print(f"chicap {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    finally:
        tols_used = get_tolerances()
        set_tolerances(Tolerances())
    text = _render(args.command, args, payload, tols_used, status)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    names = {f.name for f in fields(RunConfig)}
    return run(RunConfig(**{k: v for k, v in vars(ns).items() if k in names}))


if __name__ == "__main__":
    sys.exit(main())
