"""Command-line front end.

Each subcommand writes CSV/JSON artifacts into ``--out``.  Every artifact
starts with its schema tag and the fully resolved configuration, so passing
an artifact back through ``--config`` repeats the run.

Exit codes: 0 ok, 2 configuration error, 3 numerical failure, 4 an
experiment-level sanity assertion failed.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .ansatz import prepare_state
from .config import ExperimentConfig, command_defaults, parse_config_text, parse_value, validate
from .errors import ConfigError, ExperimentFailed, H4Error, InvalidInput
from .experiments import build_system, default_pes_grid, npe, parse_prep, prepare, vqe_trace
from .fci import overlaps
from .iqpe import quantization_bound, repeat_experiment, run_iqpe
from .plots import emit_plot
from .vqe import best_state_within

log = logging.getLogger("h4iqpe")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_ASSERT = 0, 2, 3, 4
COMMANDS = ("pes", "iqpe-conv", "overlap-scan", "shot-stats", "fcidump-export", "hamiltonian-dump")
VAR_TOL = 1e-9


# --- artifact writers -----------------------------------------------------------

def _header_lines(schema: str, cfg: ExperimentConfig) -> list:
    return [f"# schema: {schema}"] + [f"# {line}" for line in cfg.to_text().splitlines()]


def write_csv_artifact(path: Path, schema: str, cfg: ExperimentConfig, columns, rows) -> Path:
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(_header_lines(schema, cfg)) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r[c]) for c in columns])
    return path


def write_json_artifact(path: Path, schema: str, cfg: ExperimentConfig, payload: dict) -> Path:
    doc = {"schema": schema, "config": cfg.as_dict()}
    doc.update(payload)
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path


def _cell(v):
    if isinstance(v, float):
        return f"{v:.12f}" if abs(v) >= 1e-4 or v == 0.0 else f"{v:.6e}"
    return v


def _beta_tag(beta: float) -> str:
    return f"{beta:g}".replace(".", "p")


def _map(fn, items, cfg: ExperimentConfig):
    items = list(items)
    if cfg.threads <= 1 or len(items) <= 1:
        return [fn(x, cfg) for x in items]
    with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
        return list(pool.map(fn, items, [cfg] * len(items)))


def _system(beta, cfg):
    return build_system(float(beta), cfg.radius, cfg.window)


def _label_of(system, energy: float) -> str:
    """Name of the sector eigenvalue nearest to ``energy``."""
    k = int(np.argmin(np.abs(system.fci.eigenvalues - energy)))
    for lab, idx in system.fci.labels.items():
        if idx == k:
            return lab
    return f"E{k}"


# --- pes ------------------------------------------------------------------------

def _pes_point(beta, cfg):
    s = _system(beta, cfg)
    row = {"beta_deg": float(beta)}
    if "hf" in cfg.methods:
        row["hf_hartree"] = s.scf.E_hf
    if "vqe" in cfg.methods or "iqpe-over-vqe" in cfg.methods:
        trace = vqe_trace(s, "full", "mp2", cfg.vqe_evals)
        if "vqe" in cfg.methods:
            row["vqe_hartree"] = trace.energy
        if "iqpe-over-vqe" in cfg.methods:
            state = prepare(s, parse_prep(f"uccd-full({cfg.vqe_evals})"))
            rec = run_iqpe(state, s.cache, s.window, cfg.bits or 16)
            row["iqpe_over_vqe_hartree"] = rec.energy
    row["fci_hartree"] = s.e_fci
    return row


def cmd_pes(cfg: ExperimentConfig) -> dict:
    rows = _map(_pes_point, cfg.betas, cfg)
    cols = ["beta_deg"] + [c for c in ("hf_hartree", "vqe_hartree", "iqpe_over_vqe_hartree", "fci_hartree")
                           if c in rows[0]]
    out = Path(cfg.out)
    path = write_csv_artifact(out / "pes.csv", "pes/v1", cfg, cols, rows)
    summary = {}
    for c in cols[1:-1]:
        dev = [r[c] - r["fci_hartree"] for r in rows]
        summary[c[: -len("_hartree")]] = {"npe_mhartree": 1e3 * npe(dev),
                                          "max_deviation_mhartree": 1e3 * max(dev),
                                          "min_deviation_mhartree": 1e3 * min(dev)}
    write_json_artifact(out / "pes_npe.json", "pes-npe/v1", cfg, {"methods": summary})
    for m, v in summary.items():
        print(f"NPE {m:<14s} {v['npe_mhartree']:10.4f} mE_h")
    bad = [r["beta_deg"] for r in rows
           if any(r[c] < r["fci_hartree"] - VAR_TOL for c in ("hf_hartree", "vqe_hartree") if c in r)]
    if bad:
        raise ExperimentFailed(f"variational bound violated (energy below FCI) at beta = {bad}")
    return {"csv": [path]}


# --- iqpe-conv --------------------------------------------------------------------

def _conv_point(beta, cfg):
    s = _system(beta, cfg)
    state = prepare(s, parse_prep(f"uccd-full({cfg.vqe_evals})"))
    rows = []
    for m in range(cfg.bits_min, cfg.bits_max + 1):
        rec = run_iqpe(state, s.cache, s.window, m)
        rows.append({"beta_deg": float(beta), "m_bits": m, "energy_hartree": rec.energy,
                     "fci_hartree": s.e_fci, "abs_error_hartree": abs(rec.energy - s.e_fci),
                     "bound_hartree": quantization_bound(m, s.window),
                     "nearest_state": _label_of(s, rec.energy), "bits": "".join(map(str, rec.bits))})
    return rows


def cmd_iqpe_conv(cfg: ExperimentConfig) -> dict:
    rows = [r for block in _map(_conv_point, cfg.betas, cfg) for r in block]
    cols = ["beta_deg", "m_bits", "energy_hartree", "fci_hartree", "abs_error_hartree",
            "bound_hartree", "nearest_state", "bits"]
    path = write_csv_artifact(Path(cfg.out) / "iqpe_conv.csv", "iqpe-conv/v1", cfg, cols, rows)
    for b in cfg.betas:
        sub = [r for r in rows if r["beta_deg"] == b]
        first = next((r["m_bits"] for r in sub if r["abs_error_hartree"] < 1e-3), None)
        print(f"beta={b:g}: sub-mE_h from m = {first}; error at m = {sub[-1]['m_bits']}: "
              f"{sub[-1]['abs_error_hartree']:.3e} E_h")
    bad = [(r["beta_deg"], r["m_bits"]) for r in rows
           if r["nearest_state"] == "GS" and r["abs_error_hartree"] > r["bound_hartree"]]
    if bad:
        raise ExperimentFailed(f"GS landing outside the quantization bound at {bad}")
    return {"csv": [path]}


# --- overlap-scan -----------------------------------------------------------------

def _overlap_point(beta, cfg):
    s = _system(beta, cfg)
    rows = []
    for guess in cfg.guesses:
        trace = vqe_trace(s, "full", guess, cfg.vqe_evals)
        used = trace.config.guess
        for k in sorted(set(cfg.checkpoints)):
            if k > cfg.vqe_evals:
                continue
            if k == 0:
                state, energy = s.hf, s.scf.E_hf
            else:
                theta, energy = best_state_within(trace, k)
                state = prepare_state(trace.pool, theta, s.hf)
            rep = overlaps(state, s.fci)
            row = {"beta_deg": float(beta), "guess": used, "eval_index": k, "energy_hartree": energy}
            row.update({lab: rep.squared[lab] for lab in ("GS", "ES1", "ES2", "ES3")})
            rows.append(row)
    return rows


def cmd_overlap_scan(cfg: ExperimentConfig) -> dict:
    rows = [r for block in _map(_overlap_point, cfg.betas, cfg) for r in block]
    cols = ["beta_deg", "guess", "eval_index", "energy_hartree", "GS", "ES1", "ES2", "ES3"]
    path = write_csv_artifact(Path(cfg.out) / "overlap_scan.csv", "overlap-scan/v1", cfg, cols, rows)
    bad = [r for r in rows if r["GS"] + r["ES1"] + r["ES2"] + r["ES3"] > 1.0 + 1e-9]
    if bad:
        raise ExperimentFailed(f"overlap weights exceed one at {len(bad)} checkpoints")
    return {"csv": [path]}


# --- shot-stats -------------------------------------------------------------------

def _shot_block(task, cfg):
    beta, prep_text, shots = task
    s = _system(beta, cfg)
    spec = parse_prep(prep_text)
    state = prepare(s, spec)
    m = cfg.bits or 14
    stats = repeat_experiment(state, s.cache, s.window, m, shots, cfg.repetitions, cfg.seed,
                              tie_bit=cfg.tie_bit,
                              config={"beta_deg": float(beta), "prep": str(spec)})
    det = run_iqpe(state, s.cache, s.window, m)
    return {"beta_deg": float(beta), "prep": str(spec), "shots": shots, "stats": stats.to_dict(),
            "deterministic_energy_hartree": det.energy, "fci_hartree": s.e_fci,
            "modal_state": _label_of(s, stats.modal_energy)}


def cmd_shot_stats(cfg: ExperimentConfig) -> dict:
    for p in cfg.preps:
        parse_prep(p)  # config error before any work
    tasks = [(b, p, n) for b in cfg.betas for p in cfg.preps for n in cfg.shots]
    blocks = _map(_shot_block, tasks, cfg)
    out = Path(cfg.out)
    jpath = write_json_artifact(out / "shot_stats.json", "shot-stats-json/v1", cfg, {"blocks": blocks})
    summary, hist = [], []
    for b in blocks:
        st = b["stats"]
        summary.append({"beta_deg": b["beta_deg"], "prep": b["prep"], "shots": b["shots"],
                        "repetitions": st["repetitions"], "modal_energy_hartree": st["modal_energy"],
                        "modal_frequency": st["modal_frequency"], "modal_state": b["modal_state"],
                        "spread_hartree": st["spread"],
                        "deterministic_energy_hartree": b["deterministic_energy_hartree"],
                        "fci_hartree": b["fci_hartree"]})
        for h in st["histogram"]:
            hist.append({"beta_deg": b["beta_deg"], "prep": b["prep"], "shots": b["shots"],
                         "energy_hartree": h["energy_hartree"], "count": h["count"]})
        print(f"{b['prep']:<16s} shots={b['shots']:<6d} spread={st['spread']:.6f} E_h  "
              f"modal={st['modal_energy']:.6f} ({st['modal_frequency']}/{st['repetitions']}, {b['modal_state']})")
    cols = list(summary[0])
    spath = write_csv_artifact(out / "shot_stats.csv", "shot-stats/v1", cfg, cols, summary)
    hpath = write_csv_artifact(out / "shot_stats_hist.csv", "shot-hist/v1", cfg, list(hist[0]), hist)
    bad = [b for b in blocks if not 0 <= b["stats"]["modal_frequency"] <= b["stats"]["repetitions"]
           or b["stats"]["spread"] < 0]
    if bad:
        raise ExperimentFailed("inconsistent repetition statistics")
    return {"csv": [spath], "other": [jpath, hpath]}


# --- dumps ------------------------------------------------------------------------

def cmd_fcidump_export(cfg: ExperimentConfig) -> dict:
    paths = []
    for b in cfg.betas:
        s = _system(b, cfg)
        p = Path(cfg.out) / f"FCIDUMP_beta{_beta_tag(b)}"
        s.so.write_fcidump(p)
        paths.append(p)
        print(f"wrote {p}  (E_HF = {s.scf.E_hf:.10f}, E_FCI = {s.e_fci:.10f})")
    return {"other": paths}


def cmd_hamiltonian_dump(cfg: ExperimentConfig) -> dict:
    paths = []
    for b in cfg.betas:
        s = _system(b, cfg)
        p = Path(cfg.out) / f"hamiltonian_beta{_beta_tag(b)}.txt"
        head = "\n".join(_header_lines("hamiltonian/v1", cfg)) + "\n"
        p.write_text(head + s.H.dump())
        paths.append(p)
        print(f"wrote {p}  ({len(s.H)} Pauli terms, one-norm {s.H.one_norm:.6f})")
    return {"other": paths}


HANDLERS = {"pes": cmd_pes, "iqpe-conv": cmd_iqpe_conv, "overlap-scan": cmd_overlap_scan,
            "shot-stats": cmd_shot_stats, "fcidump-export": cmd_fcidump_export,
            "hamiltonian-dump": cmd_hamiltonian_dump}


# --- argument handling ------------------------------------------------------------

def _global_flags(parser, suppress: bool):
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", metavar="FILE", default=d, help="key = value config file or artifact")
    parser.add_argument("--seed", type=str, default=d, help="master seed (unsigned 64-bit)")
    parser.add_argument("--out", metavar="DIR", default=d, help="output directory")
    parser.add_argument("--threads", type=str, default=d, help="worker processes for grid points")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="h4iqpe", description="H4 ring VQE / IQPE experiments")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    _global_flags(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        _global_flags(sp, suppress=True)
        sp.add_argument("--beta", action="append", metavar="DEG",
                        help="beta in degrees (repeatable or comma separated)")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key")
        sp.add_argument("--plot", action="store_true", help="also write SVG plots")
    return p


def resolve_config(args) -> ExperimentConfig:
    base = ExperimentConfig(**command_defaults(args.command, default_pes_grid()))
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        cfg = parse_config_text(text, base)
    else:
        cfg = base
    updates = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        updates[k.strip()] = parse_value(k.strip(), v)
    if args.beta:
        updates["betas"] = parse_value("betas", ",".join(args.beta))
    for key in ("seed", "out", "threads"):
        val = getattr(args, key, None)
        if val is not None:
            updates[key] = parse_value(key, val)
    if args.plot:
        updates["plots"] = True
    return validate(cfg.updated(**updates), args.command)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        Path(cfg.out).mkdir(parents=True, exist_ok=True)
        written = HANDLERS[args.command](cfg)
        if cfg.plots:
            for path in written.get("csv", []):
                print(f"wrote {emit_plot(path)}")
    except (ConfigError, InvalidInput) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ExperimentFailed as exc:
        print(f"assertion failed: {exc}", file=sys.stderr)
        return EXIT_ASSERT
    except (H4Error, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
