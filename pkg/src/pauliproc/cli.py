"""Command-line front end.

Subcommands::

    pauliproc suite commutator|anticommutator   full fidelity/K table
    pauliproc dip psi-|phi-                     coincidence-dip scan + fit
    pauliproc tomo                              single-U tomography run
    pauliproc calibrate                         reference (delayed-photon) run only

Options may come from a strict-schema JSON config file (``--config``)
and are overridden by command-line flags.  Every run writes into its
own output directory: a config snapshot plus the CSV/JSON artifacts;
an existing non-empty directory is refused unless ``--force`` is given.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .algebra import hwp_unitary
from .processor import NoiseModel
from .experiments import (
    ANTICOMMUTATOR_SUITE,
    COMMUTATOR_SUITE,
    U_PRESETS,
    bootstrap_errors,
    dip_scan,
    fit_noise_to_visibility,
    fit_visibility,
    preset_unitary,
    probability_grids,
    run_process_experiment,
    theory_k,
)
from .tomography import TomographySettings, simulate_counts, PROBE_LABELS


class ConfigError(Exception):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"field {field_name!r}: {message}")
        self.field_name = field_name


@dataclass
class RunConfig:
    u: str = "X"
    u_matrix: dict | None = None
    v1: float = 1.0
    v2: float = 1.0
    hwp_offset_deg: float = 0.0
    flux: float = 1e5
    seed: int = 1
    alpha: str = "0:90:5"
    replicas: int = 200
    fit_visibility: float | None = None
    out: str = "run"
    force: bool = False

    def validate(self) -> None:
        for name in ("v1", "v2"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not (0.0 <= v <= 1.0):
                raise ConfigError(name, f"must be a number in [0, 1], got {v!r}")
        if not isinstance(self.flux, (int, float)) or self.flux <= 0:
            raise ConfigError("flux", f"must be a positive number, got {self.flux!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed", f"must be a non-negative integer, got {self.seed!r}")
        if not isinstance(self.replicas, int) or self.replicas < 0:
            raise ConfigError("replicas", f"must be a non-negative integer, got {self.replicas!r}")
        if not math.isfinite(self.hwp_offset_deg):
            raise ConfigError("hwp_offset_deg", "must be finite")
        if self.fit_visibility is not None and not (0.0 < self.fit_visibility < 1.0):
            raise ConfigError("fit_visibility", "target must lie strictly between 0 and 1")
        self.parse_alpha()
        self.resolve_u()

    def parse_alpha(self) -> np.ndarray:
        try:
            start, stop, step = (float(x) for x in self.alpha.split(":"))
        except (ValueError, AttributeError):
            raise ConfigError("alpha", f"expected 'start:stop:step', got {self.alpha!r}") from None
        if step == 0:
            raise ConfigError("alpha", "step must be nonzero")
        grid = np.arange(start, stop + 0.5 * step, step)
        if grid.size == 0:
            raise ConfigError("alpha", "grid is empty")
        return grid

    def resolve_u(self) -> tuple[str, np.ndarray]:
        """(label, matrix) for the configured intermediate unitary."""
        if self.u_matrix is not None:
            try:
                mat = np.asarray(self.u_matrix["re"], dtype=float) + 1j * np.asarray(
                    self.u_matrix["im"], dtype=float
                )
            except (KeyError, TypeError, ValueError):
                raise ConfigError("u_matrix", "expected {'re': 2x2, 'im': 2x2}") from None
            if mat.shape != (2, 2):
                raise ConfigError("u_matrix", f"expected 2x2 entries, got shape {mat.shape}")
            return "custom", mat
        label = str(self.u)
        if label.upper() in U_PRESETS:
            return label.upper(), preset_unitary(label)
        try:
            angle = float(label)
        except ValueError:
            raise ConfigError(
                "u", f"expected a preset ({', '.join(sorted(U_PRESETS))}) or an HWP angle in degrees, got {label!r}"
            ) from None
        return f"hwp@{angle:g}deg", hwp_unitary(angle + self.hwp_offset_deg)

    def noise(self) -> NoiseModel:
        return NoiseModel(v1=float(self.v1), v2=float(self.v2), hwp_offset_deg=float(self.hwp_offset_deg))


_CONFIG_FIELDS = {f.name for f in fields(RunConfig)}


def parse_config(path: str | None, overrides: dict) -> RunConfig:
    """Merge defaults, an optional JSON file and explicit flag overrides."""
    data: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError("config", f"file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be a JSON object")
        unknown = set(data) - _CONFIG_FIELDS
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown configuration key")
    data.update({k: v for k, v in overrides.items() if v is not None})
    cfg = RunConfig(**{k: data[k] for k in data if k in _CONFIG_FIELDS})
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# output helpers

def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _jsonable(x):
    if isinstance(x, float) and math.isnan(x):
        return None
    return x


def _chi_json(chi: np.ndarray) -> dict:
    return {
        "re": [[float(v) for v in row] for row in chi.real],
        "im": [[float(v) for v in row] for row in chi.imag],
    }


def _prepare_outdir(cfg: RunConfig, command: str, extra: dict) -> Path:
    out = Path(cfg.out)
    if out.exists() and any(out.iterdir()) and not cfg.force:
        raise RuntimeError(
            f"output directory {out} already contains results; pass --force to overwrite"
        )
    out.mkdir(parents=True, exist_ok=True)
    snapshot = {"command": command, **extra, **asdict(cfg)}
    (out / "config.json").write_text(json.dumps(snapshot, indent=2, sort_keys=True) + "\n")
    return out


def _write_table_csv(path: Path, reports) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["U", "F", "sigma_F", "K_calib", "sigma_K", "K_th"])
        for r in reports:
            writer.writerow(
                [r.u_label, _fmt(r.fidelity), _fmt(r.sigma_f), _fmt(r.k), _fmt(r.sigma_k), _fmt(r.k_th)]
            )


def _report_json(cfg: RunConfig, kind: str, reports) -> dict:
    return {
        "kind": kind,
        "flux": float(cfg.flux),
        "seed": int(cfg.seed),
        "replicas": int(cfg.replicas),
        "noise": {"v1": float(cfg.v1), "v2": float(cfg.v2), "hwp_offset_deg": float(cfg.hwp_offset_deg)},
        "cases": [
            {
                "u": r.u_label,
                "fidelity": _jsonable(r.fidelity),
                "sigma_f": r.sigma_f,
                "k_calib": r.k,
                "sigma_k": r.sigma_k,
                "k_th": r.k_th,
                "null_result": r.null_result,
                "chi": _chi_json(r.chi),
            }
            for r in reports
        ],
    }


def validate_report(doc: dict) -> None:
    """Strict shape check of a suite/tomo report document."""
    required = {"kind", "flux", "seed", "replicas", "noise", "cases"}
    if set(doc) != required:
        raise ValueError(f"report keys {sorted(doc)} != {sorted(required)}")
    if doc["kind"] not in ("commutator", "anticommutator"):
        raise ValueError(f"bad kind {doc['kind']!r}")
    if set(doc["noise"]) != {"v1", "v2", "hwp_offset_deg"}:
        raise ValueError("bad noise keys")
    for case in doc["cases"]:
        expected = {"u", "fidelity", "sigma_f", "k_calib", "sigma_k", "k_th", "null_result", "chi"}
        if set(case) != expected:
            raise ValueError(f"case keys {sorted(case)} != {sorted(expected)}")
        for part in ("re", "im"):
            m = case["chi"][part]
            if len(m) != 4 or any(len(row) != 4 for row in m):
                raise ValueError("chi must be 4x4")
        for key in ("sigma_f", "k_calib", "sigma_k", "k_th"):
            if not isinstance(case[key], (int, float)):
                raise ValueError(f"{key} must be numeric")
        if case["fidelity"] is not None and not isinstance(case["fidelity"], (int, float)):
            raise ValueError("fidelity must be numeric or null")


def validate_fit(doc: dict) -> None:
    required = {
        "program", "visibility", "sigma_v", "alpha0_deg", "dip_alpha_deg",
        "rms_residual", "amplitude", "offset", "flux", "seed", "noise",
    }
    missing = required - set(doc)
    extra = set(doc) - required - {"v_star", "achieved_visibility", "target_visibility"}
    if missing or extra:
        raise ValueError(f"fit document missing {sorted(missing)}, unexpected {sorted(extra)}")
    for key in required - {"program", "noise"}:
        if not isinstance(doc[key], (int, float)):
            raise ValueError(f"{key} must be numeric")


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# subcommands

def cmd_suite(kind: str, cfg: RunConfig) -> int:
    labels = COMMUTATOR_SUITE if kind == "commutator" else ANTICOMMUTATOR_SUITE
    out = _prepare_outdir(cfg, f"suite {kind}", {})
    reports = []
    for idx, label in enumerate(labels):
        u = preset_unitary(label)
        report = run_process_experiment(
            kind, u, cfg.noise(), cfg.flux, _case_seed(cfg.seed, idx),
            u_label=label, replicas=cfg.replicas,
        )
        reports.append(report)
    _write_table_csv(out / "table.csv", reports)
    doc = _report_json(cfg, kind, reports)
    validate_report(doc)
    _write_json(out / "report.json", doc)
    print(f"wrote {out / 'table.csv'} and {out / 'report.json'}")
    return 0


def cmd_tomo(kind: str, cfg: RunConfig) -> int:
    label, u = cfg.resolve_u()
    out = _prepare_outdir(cfg, "tomo", {"kind": kind})
    report = run_process_experiment(
        kind, u, cfg.noise(), cfg.flux, cfg.seed, u_label=label, replicas=cfg.replicas
    )
    _write_table_csv(out / "table.csv", [report])
    doc = _report_json(cfg, kind, [report])
    validate_report(doc)
    _write_json(out / "report.json", doc)
    print(f"wrote {out / 'table.csv'} and {out / 'report.json'}")
    return 0


def cmd_dip(program: str, cfg: RunConfig) -> int:
    alphas = cfg.parse_alpha()
    out = _prepare_outdir(cfg, f"dip {program}", {})
    scan = dip_scan(program, alphas, cfg.noise(), cfg.flux, cfg.seed)
    visibility, alpha0, rms = fit_visibility(scan)
    if cfg.replicas > 0:
        bootstrap_errors(scan, cfg.replicas)
    else:
        scan.sigma_v = 0.0

    fitted = scan.amplitude * np.cos(np.radians(2.0 * (alphas - alpha0))) ** 2 + scan.offset
    with open(out / "dip.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["alpha_deg", "counts", "fitted_counts"])
        for a, c, f in zip(alphas, scan.counts, fitted):
            writer.writerow([_fmt(a), _fmt(c), _fmt(f)])

    doc = {
        "program": program,
        "visibility": visibility,
        "sigma_v": scan.sigma_v,
        "alpha0_deg": alpha0,
        "dip_alpha_deg": scan.dip_alpha_deg,
        "rms_residual": rms,
        "amplitude": scan.amplitude,
        "offset": scan.offset,
        "flux": float(cfg.flux),
        "seed": int(cfg.seed),
        "noise": {"v1": float(cfg.v1), "v2": float(cfg.v2), "hwp_offset_deg": float(cfg.hwp_offset_deg)},
    }
    if cfg.fit_visibility is not None:
        v_star, achieved = fit_noise_to_visibility(
            program, cfg.fit_visibility, alphas, hwp_offset_deg=cfg.hwp_offset_deg
        )
        doc["v_star"] = v_star
        doc["achieved_visibility"] = achieved
        doc["target_visibility"] = float(cfg.fit_visibility)
    validate_fit(doc)
    _write_json(out / "fit.json", doc)
    print(f"wrote {out / 'dip.csv'} and {out / 'fit.json'}")
    return 0


def cmd_calibrate(kind: str, cfg: RunConfig) -> int:
    label, u = cfg.resolve_u()
    out = _prepare_outdir(cfg, "calibrate", {"kind": kind})
    settings = TomographySettings.standard(flux=cfg.flux, seed=cfg.seed)
    _, p_cal = probability_grids(kind, u, cfg.noise(), settings)
    table = simulate_counts(p_cal, cfg.flux, cfg.seed, stream=1)
    with open(out / "calibration.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["probe", "outcome", "counts"])
        for j, probe in enumerate(PROBE_LABELS):
            for k, outcome in enumerate(PROBE_LABELS):
                writer.writerow([probe, outcome, int(table.counts[j, k])])
    _write_json(
        out / "report.json",
        {
            "command": "calibrate",
            "kind": kind,
            "u": label,
            "flux": float(cfg.flux),
            "seed": int(cfg.seed),
            "total": float(table.total()),
            "k_th": theory_k(kind, u),
        },
    )
    print(f"wrote {out / 'calibration.csv'} and {out / 'report.json'}")
    return 0


def _case_seed(seed: int, case_index: int) -> int:
    # distinct, stable per-case seed for suite runs
    return seed * 1000 + case_index


# ---------------------------------------------------------------------------
# argument parsing

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--u", help="intermediate operation: preset name or HWP angle in degrees")
    p.add_argument("--v1", type=float, help="interference overlap at the first beam splitter")
    p.add_argument("--v2", type=float, help="interference overlap at the second beam splitter")
    p.add_argument("--hwp-offset", type=float, dest="hwp_offset_deg",
                   help="systematic central-HWP angle offset in degrees")
    p.add_argument("--flux", type=float, help="expected calibration counts per setting")
    p.add_argument("--seed", type=int, help="master random seed")
    p.add_argument("--alpha", help="HWP scan grid start:stop:step in degrees")
    p.add_argument("--replicas", type=int, help="bootstrap replicas for error bars")
    p.add_argument("--fit-visibility", type=float, dest="fit_visibility",
                   help="search for the overlap v matching this dip visibility")
    p.add_argument("--out", help="output directory")
    p.add_argument("--force", action="store_const", const=True, default=None,
                   help="overwrite an existing output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pauliproc",
        description="Simulated two-gate programmable processor: commutator/anti-commutator "
        "tomography, calibration and coincidence-dip scans.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_suite = sub.add_parser("suite", help="run the full preset table for one operation kind")
    p_suite.add_argument("kind", choices=("commutator", "anticommutator"))
    _add_common(p_suite)

    p_dip = sub.add_parser("dip", help="coincidence-dip scan over the HWP angle")
    p_dip.add_argument("program", choices=("psi-", "phi-"))
    _add_common(p_dip)

    p_tomo = sub.add_parser("tomo", help="tomography of a single intermediate operation")
    p_tomo.add_argument("--kind", choices=("commutator", "anticommutator"), default="commutator")
    _add_common(p_tomo)

    p_cal = sub.add_parser("calibrate", help="reference run with temporally delayed photons")
    p_cal.add_argument("--kind", choices=("commutator", "anticommutator"), default="commutator")
    _add_common(p_cal)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        k: getattr(args, k, None)
        for k in ("u", "v1", "v2", "hwp_offset_deg", "flux", "seed", "alpha",
                  "replicas", "fit_visibility", "out", "force")
    }
    try:
        cfg = parse_config(args.config, overrides)
        if args.command == "suite":
            return cmd_suite(args.kind, cfg)
        if args.command == "dip":
            return cmd_dip(args.program, cfg)
        if args.command == "tomo":
            return cmd_tomo(args.kind, cfg)
        if args.command == "calibrate":
            return cmd_calibrate(args.kind, cfg)
        raise RuntimeError(f"unhandled command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
