"""Command-line front end: validate, simulate, protocol runs, sweeps.

Every result file is written atomically and gets a JSON manifest next to it
recording the effective config hash, the command, integrator settings, wall
time, and any warnings raised during the run. Reruns of the same config
produce byte-identical CSV.

Exit codes: 0 ok, 2 config or usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict
from importlib import resources

import numpy as np

from . import analysis, network, protocol
from .collective import collective_operator, multi_pair_product_state
from .errors import ConfigError, ConvergenceError, ResonanceError
from .hamiltonians import DISPERSIVE_RATIO, bridge_terms
from .operators import SpaceLayout, expectation

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

PRESETS = ("fig4_chain", "two_resonator_switch", "four_chain")


# ---------------------------------------------------------------------------
# config loading and result plumbing

def _load_config(arg):
    """Resolve a path or preset name to (NetworkConfig, preset name, source)."""
    if os.path.exists(arg):
        with open(arg, "r", encoding="utf-8") as fh:
            text = fh.read()
        return network.parse_config(text), None, arg
    if arg in PRESETS:
        text = resources.files("qswitch.presets").joinpath(f"{arg}.json").read_text()
        return network.parse_config(text), arg, f"preset:{arg}"
    raise ConfigError([("config", f"no such config file or preset: {arg!r}")])


def _fmt(value):
    return format(float(value), ".12g")


def _atomic_write(path, text):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _csv_columns(config):
    cols = ["t_ns"]
    cols += [f"n_{r.label}" for r in config.resonators]
    cols += [f"Jz_{sw.label}" for sw in config.switches]
    cols += ["trace", "min_eig"]
    return cols


def _trajectory_csv(config, traj):
    cols = _csv_columns(config)
    series = {"t_ns": traj.times, **traj.series}
    lines = [",".join(cols)]
    for i in range(traj.times.size):
        lines.append(",".join(_fmt(series[c][i]) for c in cols))
    return "\n".join(lines) + "\n"


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_json_safe(v) for v in obj.tolist()]
    return obj


def _manifest_path(result_path):
    base, _ = os.path.splitext(result_path)
    return f"{base}.manifest.json"


def _write_manifest(result_path, command, config, preset, wall_time, warns, extra=None):
    doc = {
        "command": command,
        "config_sha256": hashlib.sha256(
            network.serialize_config(config).encode("utf-8")
        ).hexdigest(),
        "preset": preset,
        "integrator": asdict(config.integrator),
        "columns": _csv_columns(config),
        "wall_time_s": round(wall_time, 6),
        "warnings": list(warns),
    }
    if extra:
        doc.update(_json_safe(extra))
    _atomic_write(_manifest_path(result_path), json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _run_network(config):
    """simulate_network with warnings captured instead of printed."""
    started = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        traj = network.simulate_network(config)
    wall = time.perf_counter() - started
    messages = sorted({str(w.message) for w in caught})
    return traj, wall, messages


# ---------------------------------------------------------------------------
# validate

def _validity_report(config):
    lines = [
        f"config ok: {len(config.resonators)} resonators, "
        f"{len(config.switches)} switches, model {config.model}"
    ]
    for sw in config.switches:
        for end in sw.endpoints:
            res = config.resonator(end)
            delta = sw.omega_q - res.omega
            g = sw.g[end]
            if delta == 0.0:
                lines.append(
                    f"warning: switch {sw.label} at {end}: "
                    "dispersive model invalid at resonance"
                )
                continue
            if g == 0.0:
                continue
            ratio = abs(delta / g)
            note = "" if ratio >= DISPERSIVE_RATIO * (1.0 - 1e-9) else \
                "  (below the dispersive threshold)"
            lines.append(f"switch {sw.label}: |Delta/g| at {end} = {ratio:.6g}{note}")
    for sw in config.switches:
        res_l, res_r = (config.resonator(e) for e in sw.endpoints)
        if {res_l.role, res_r.role} != {"storage", "bus"}:
            continue
        delta_sb = res_l.omega - res_r.omega
        if delta_sb == 0.0:
            lines.append(
                f"warning: switch {sw.label}: storage and bus resonators are "
                "degenerate; the bus cannot be eliminated"
            )
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            try:
                g_ab = abs(network._edge_coefficients(config, sw).g_ab)
            except ResonanceError:
                continue
        if g_ab > 0.0:
            lines.append(
                f"switch {sw.label}: |Delta_sb/g_ab| = {abs(delta_sb) / g_ab:.6g}"
            )
    for res in config.resonators:
        filled = config.initial.get(res.label, 0)
        lines.append(
            f"resonator {res.label}: fock_dim {res.fock_dim}, initial {filled}, "
            f"truncation headroom {res.fock_dim - 1 - filled}"
        )
    return lines


def cmd_validate(args):
    config, _, source = _load_config(args.config)
    diags = network.validate_config(config)
    if diags:
        raise ConfigError(diags)
    for line in _validity_report(config):
        print(line)
    print(f"source: {source}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate

def _switch_state_from_token(sw, token):
    if token == "on":
        return network.all_ground_state(sw)
    if token == "off":
        return network.off_state(sw)
    try:
        count = int(token)
    except ValueError:
        raise ConfigError(
            [(f"--switch {sw.label}",
              f"state must be on, off, or an integer pair count, got {token!r}")]
        ) from None
    return network.SwitchState(j=count)


def _apply_switch_overrides(config, overrides):
    applied = {}
    for item in overrides or ():
        name, sep, token = item.partition("=")
        if not sep:
            raise ConfigError([("--switch", f"expected NAME=STATE, got {item!r}")])
        sw = config.switch(name)
        config = network.with_switch_state(config, name, _switch_state_from_token(sw, token))
        applied[name] = token
    return config, applied


def cmd_simulate(args):
    config, preset, source = _load_config(args.config)
    config, applied = _apply_switch_overrides(config, args.switch)
    traj, wall, warns = _run_network(config)
    for msg in warns:
        print(f"warning: {msg}", file=sys.stderr)
    _atomic_write(args.out, _trajectory_csv(config, traj))
    _write_manifest(
        args.out, "simulate", config, preset, wall, warns,
        extra={
            "source": source,
            "switch_overrides": applied,
            "run_metadata": traj.metadata,
        },
    )
    print(f"wrote {args.out} ({traj.times.size} rows)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# protocol

def cmd_protocol(args):
    config, preset, source = _load_config(args.config)
    diags = network.validate_config(config)
    if diags:
        raise ConfigError(diags)
    if not config.switches:
        raise ConfigError([("switches", "config defines no switches")])
    label = args.switch or config.switches[0].label
    sw = config.switch(label)
    if not 0 <= args.jprime <= args.j <= sw.n_pairs:
        raise ConfigError(
            [("--j/--jprime",
              f"need 0 <= jprime <= j <= {sw.n_pairs} for switch {label!r}, "
              f"got j={args.j}, jprime={args.jprime}")]
        )

    coeffs = network._edge_coefficients(config, sw)
    plan = protocol.plan_switch(sw.collection, coeffs, args.j, args.jprime)

    res_l, res_r = (config.resonator(e) for e in sw.endpoints)
    layout = SpaceLayout.build(
        (res_l.label, res_l.fock_dim, "boson"),
        (res_r.label, res_r.fock_dim, "boson"),
        *[(q, 2, "qubit") for q in sw.qubit_labels],
    )
    hamiltonian = bridge_terms(
        layout, res_l, res_r, sw.spec(), coeffs,
        include_odd_in_jz=config.flags.odd_qubit_counts_in_jz,
    )
    tokens = ("gg",) * args.j + ("singlet",) * (sw.n_pairs - args.j)
    initial = multi_pair_product_state(layout, [(sw.collection, tokens)])

    started = time.perf_counter()
    result = protocol.simulate_protocol(plan, hamiltonian, initial)
    wall = time.perf_counter() - started

    trajectory = result["trajectory"]
    jz_op = collective_operator(
        layout, sw.collection, "z",
        include_odd=config.flags.odd_qubit_counts_in_jz and sw.n_qubits % 2 == 1,
    )
    jz_timeline = [float(np.real(expectation(jz_op, s))) for s in trajectory]
    final_fidelity = protocol._qubit_fidelity(
        plan, trajectory[-1], plan.predicted["psi3_target"]
    )
    doc = {
        "switch": label,
        "j": args.j,
        "j_prime": args.jprime,
        "j_final": plan.j_target,
        "t2_ns": plan.t2,
        "schedule_total_ns": plan.schedule.total_duration,
        "steps": [
            {
                "kind": s.kind,
                "targets": list(s.targets),
                "duration_ns": s.duration,
                "axis": s.axis,
                "angle": s.angle,
            }
            for s in plan.schedule.steps
        ],
        "step_fidelities": result["fidelities"],
        "final_fidelity": final_fidelity,
        "jz_timeline": jz_timeline,
        "coupling_mhz": {
            "before": 1e3 * protocol.coupling_of_state(trajectory[0], coeffs, sw.collection),
            "after": 1e3 * protocol.coupling_of_state(trajectory[-1], coeffs, sw.collection),
        },
    }
    _atomic_write(args.out, json.dumps(_json_safe(doc), indent=2) + "\n")
    _write_manifest(args.out, "protocol", config, preset, wall, [],
                    extra={"source": source, "switch": label,
                           "j": args.j, "j_prime": args.jprime})
    print(f"wrote {args.out} (final fidelity {final_fidelity:.6f})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# couplings

def _coupling_rows(config):
    table = network.effective_coupling_table(config)
    edges = {sw.endpoints for sw in config.switches}
    rows = []
    for (a, b), value in table.items():
        row = {"pair": [a, b], "g_mhz": value * 1e3}
        if (a, b) not in edges:
            first_switch = network._path_between(config, a, b)[0][0]
            bare = abs(network._edge_coefficients(config, first_switch).g_ab)
            row["ratio_to_bare"] = abs(value) / bare if bare > 0.0 else math.inf
            row["bare_edge"] = list(first_switch.endpoints)
        rows.append(row)
    return rows


def cmd_couplings(args):
    config, _, _ = _load_config(args.config)
    rows = _coupling_rows(config)
    if args.json:
        print(json.dumps(rows, indent=2))
        return EXIT_OK
    for row in rows:
        a, b = row["pair"]
        line = f"{a}-{b}  {row['g_mhz']:+.6f} MHz"
        if "ratio_to_bare" in row:
            ea, eb = row["bare_edge"]
            line += f"  ({row['ratio_to_bare']:.4f} of bare {ea}-{eb})"
        print(line)
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep

def _descend_labeled(entries, label, section, path):
    for entry in entries:
        if entry.get("label") == label:
            return entry
    raise ConfigError([("--param", f"{path}: no {section} labeled {label!r}")])


def _rescaled_state(sw_doc, n_pairs_new):
    state = sw_doc["state"]
    if "j" in state:
        if state["j"] > n_pairs_new:
            raise ConfigError(
                [("--param", f"state j={state['j']} does not fit {n_pairs_new} pairs")]
            )
        return state
    pattern = state["pattern"]
    if len(pattern) == n_pairs_new:
        return state
    if all(tok == "gg" for tok in pattern):
        return {"pattern": ["gg"] * n_pairs_new}
    raise ConfigError(
        [("--param",
          "cannot resize a switch with an explicit mixed pattern; "
          "set state to all gg or a j value first")]
    )


def _apply_param(config, path, value):
    """New NetworkConfig with the numeric field at path set to value.

    Paths are dotted: section, label (or * for every entry), then field
    keys, e.g. resonators.B.omega_ghz or switches.*.n_qubits. Changing
    n_qubits rescales an all-gg state pattern to the new pair count.
    """
    parts = path.split(".")
    doc = json.loads(network.serialize_config(config))
    if len(parts) < 2:
        raise ConfigError([("--param", f"path too short: {path!r}")])
    section, rest = parts[0], parts[1:]

    if section in ("resonators", "switches"):
        if len(rest) < 2:
            raise ConfigError([("--param", f"path too short: {path!r}")])
        label, fields = rest[0], rest[1:]
        if label == "*":
            targets = doc[section]
        else:
            targets = [_descend_labeled(doc[section], label, section[:-1], path)]
        for entry in targets:
            _set_numeric(entry, fields, value, path)
            if section == "switches" and fields == ["n_qubits"]:
                entry["state"] = _rescaled_state(entry, int(value) // 2)
    elif section in ("integrator", "flags", "initial"):
        _set_numeric(doc.setdefault(section, {}), rest, value, path)
    else:
        raise ConfigError([("--param", f"unknown config section {section!r}")])
    return network.parse_config(json.dumps(doc))


def _set_numeric(node, fields, value, path):
    for key in fields[:-1]:
        node = node.get(key)
        if not isinstance(node, dict):
            raise ConfigError([("--param", f"{path}: no such field")])
    leaf = fields[-1]
    if leaf not in node:
        raise ConfigError([("--param", f"{path}: no such field")])
    old = node[leaf]
    if isinstance(old, bool) or not isinstance(old, (int, float)):
        raise ConfigError([("--param", f"{path} is not a numeric field")])
    if isinstance(old, int):
        if float(value) != int(value):
            raise ConfigError([("--param", f"{path} takes integer values, got {value}")])
        node[leaf] = int(value)
    else:
        node[leaf] = float(value)


def _sweep_values(text):
    tokens = [tok.strip() for tok in text.split(",") if tok.strip()]
    if not tokens:
        raise ConfigError([("--param", "empty sweep range")])
    try:
        return [float(tok) for tok in tokens]
    except ValueError as exc:
        raise ConfigError([("--param", f"non-numeric sweep value: {exc}")]) from None


def _max_workers(n_jobs):
    cap = os.environ.get("QSWITCH_THREADS", "")
    if cap:
        try:
            cap_val = int(cap)
        except ValueError:
            raise ConfigError([("QSWITCH_THREADS", f"not an integer: {cap!r}")]) from None
        if cap_val < 1:
            raise ConfigError([("QSWITCH_THREADS", "must be >= 1")])
        return min(n_jobs, cap_val)
    return min(n_jobs, os.cpu_count() or 1)


def cmd_sweep(args):
    config, preset, source = _load_config(args.config)
    path, sep, range_text = args.param.partition("=")
    if not sep:
        raise ConfigError([("--param", f"expected PATH=V1,V2,..., got {args.param!r}")])
    values = _sweep_values(range_text)
    points = [(v, _apply_param(config, path, v)) for v in values]

    leaf = path.split(".")[-1]
    os.makedirs(args.out, exist_ok=True)
    workers = _max_workers(len(points))

    def run(index):
        value, cfg = points[index]
        traj, wall, warns = _run_network(cfg)
        return index, traj, wall, warns

    results = [None] * len(points)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run, i) for i in range(len(points))]
        for fut in as_completed(futures):
            index, traj, wall, warns = fut.result()
            results[index] = (traj, wall, warns)

    first_column = f"n_{config.resonators[0].label}"
    summary_lines = [f"{path},csv,swap_rate_ghz,decay_rate_per_ns"]
    for i, (value, cfg) in enumerate(points):
        traj, wall, warns = results[i]
        name = f"point{i:02d}_{leaf}_{format(value, '.6g')}.csv"
        out_csv = os.path.join(args.out, name)
        _atomic_write(out_csv, _trajectory_csv(cfg, traj))
        _write_manifest(out_csv, "sweep", cfg, preset, wall, warns,
                        extra={"source": source, "param": path, "value": value})
        trace = traj.series[first_column]
        try:
            swap = _fmt(analysis.swap_rate(traj.times, trace))
        except ValueError:
            swap = "nan"
        try:
            decay = _fmt(analysis.decay_rate(traj.times, trace))
        except ValueError:
            decay = "nan"
        summary_lines.append(f"{_fmt(value)},{name},{swap},{decay}")

    summary_path = os.path.join(args.out, "summary.csv")
    _atomic_write(summary_path, "\n".join(summary_lines) + "\n")
    _write_manifest(summary_path, "sweep", config, preset, 0.0, [],
                    extra={"source": source, "param": path,
                           "values": values, "points": len(points)})
    print(f"wrote {len(points)} runs and {summary_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point

def build_parser():
    parser = argparse.ArgumentParser(
        prog="qswitch",
        description="Simulate resonator networks with collective-qubit coupling switches.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a config and report physics diagnostics")
    p.add_argument("config", help="config file path or preset name")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="integrate a config and write a trajectory CSV")
    p.add_argument("config", help="config file path or preset name")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument(
        "--switch", action="append", metavar="NAME=STATE",
        help="override a switch state: on, off, or an integer count of coupled pairs",
    )
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("protocol", help="run the three-step switching scheme")
    p.add_argument("config", help="config file path or preset name")
    p.add_argument("--j", type=int, required=True, help="initial coupled pair count")
    p.add_argument("--jprime", type=int, required=True, help="pairs to decouple")
    p.add_argument("--switch", help="switch label (default: first in the config)")
    p.add_argument("--out", required=True, help="output JSON path")
    p.set_defaults(func=cmd_protocol)

    p = sub.add_parser("couplings", help="print the effective coupling table")
    p.add_argument("config", help="config file path or preset name")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_couplings)

    p = sub.add_parser("sweep", help="run a config across a parameter range")
    p.add_argument("config", help="config file path or preset name")
    p.add_argument("--param", required=True, metavar="PATH=V1,V2,...",
                   help="dotted numeric field path and comma-separated values")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    except ResonanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
