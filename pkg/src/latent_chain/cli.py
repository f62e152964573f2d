"""Command line: fit | bootstrap | compare | simulate | replicate.

Every command is deterministic given its config and seed.  Exit codes:
0 ok, 1 usage/config error, 2 non-convergence, 3 replication mismatch.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .estimation import FitOptions, FitResult, em_fit
from .figures import save_bootstrap_histogram, save_transition_heatmaps
from .inference import InferenceError, bootstrap_gof, compare_nested, g_squared, simulate
from .model_core import ModelError, ModelSpec, ParameterSet, build_model_spec
from .panel_data import PanelDataError, PanelSchema, PanelTable, parse_panel_csv, write_panel_csv
from .replication import (
    REPLICATION_SEED,
    bundled_path,
    config_digest,
    fit_to_doc,
    run_replication,
    write_json,
)

SEED_ENV = "LATENT_CHAIN_SEED"


class ConfigError(ValueError):
    """Configuration problem; the message names the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"config field '{field}': {message}")
        self.field = field


def _resolve_config_path(value: str) -> Path:
    """A filesystem path, or the name of a bundled config."""
    p = Path(value)
    if p.exists():
        return p
    if "/" not in value and not value.endswith(".json"):
        bundled = bundled_path("configs", f"{value}.json")
        if bundled.exists():
            return bundled
    raise ConfigError("config", f"file not found: {value}")


def _load_config(value: str) -> tuple[dict, Path]:
    path = _resolve_config_path(value)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ConfigError("config", f"{path}: top level must be an object")
    return doc, path.parent


def _resolve_data_path(base: Path, value: str, field: str) -> Path:
    p = Path(value)
    if not p.is_absolute():
        rel = base / p
        if rel.exists():
            return rel
    if p.exists():
        return p
    raise ConfigError(field, f"file not found: {value}")


def _load_table_from_config(config: dict, base: Path) -> tuple[PanelTable, PanelSchema]:
    if "data" not in config:
        raise ConfigError("data", "required")
    data_path = _resolve_data_path(base, config["data"], "data")
    schema_value = config.get("schema")
    if schema_value is None:
        schema_path = data_path.parent / (data_path.stem + ".schema.json")
        if not schema_path.exists():
            raise ConfigError("schema", f"no sidecar schema next to {data_path}")
    else:
        schema_path = _resolve_data_path(base, schema_value, "schema")
    schema = PanelSchema.from_file(schema_path)
    table = parse_panel_csv(data_path.read_text(encoding="utf-8"), schema)
    return table, schema


_FIX_FIELDS = {
    "delta": ("group", "class"),
    "rho": ("occasion", "group", "class", "category"),
    "tau": ("occasion", "group", "from_class", "to_class"),
}


def _fixes_from_config(entries, schema: PanelSchema, field: str) -> dict:
    fixes = {}
    for i, entry in enumerate(entries):
        where = f"{field}[{i}]"
        kind = entry.get("param")
        if kind not in _FIX_FIELDS:
            raise ConfigError(where, "param must be delta, rho, or tau")
        try:
            value = float(entry["value"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError(where, "needs a numeric 'value'") from None
        try:
            h = schema.groups.index(entry["group"])
        except (KeyError, ValueError):
            raise ConfigError(where, f"unknown group {entry.get('group')!r}") from None
        try:
            if kind == "delta":
                cell = ("delta", h, int(entry["class"]) - 1)
            elif kind == "rho":
                cell = ("rho", int(entry["occasion"]) - 1, h,
                        int(entry["class"]) - 1, int(entry["category"]) - 1)
            else:
                cell = ("tau", int(entry["occasion"]) - 1, h,
                        int(entry["from_class"]) - 1, int(entry["to_class"]) - 1)
        except KeyError as exc:
            raise ConfigError(where, f"missing key {exc}") from None
        fixes[cell] = value
    return fixes


def _spec_from_config(config: dict, table: PanelTable, schema: PanelSchema) -> ModelSpec:
    model = config.get("model")
    if not isinstance(model, dict):
        raise ConfigError("model", "required object")
    names = tuple(model.get("constraints", ()))
    manifest = "manifest" in names
    if "classes" not in model and not manifest:
        raise ConfigError("model.classes", "required unless the model is manifest")
    classes = int(model.get("classes", table.n_categories))
    if classes < 1:
        raise ConfigError("model.classes", "must be >= 1")
    fixes = _fixes_from_config(model.get("fixed", ()), schema, "model.fixed")
    try:
        return build_model_spec(
            n_groups=table.n_groups,
            n_categories=table.n_categories,
            n_occasions=table.occasions,
            n_classes=classes,
            constraint_names=names,
            fixes=fixes,
        )
    except ModelError as exc:
        raise ConfigError("model.constraints", str(exc)) from None


def _effective_seed(cli_seed, config: dict, block: str) -> int:
    if cli_seed is not None:
        return cli_seed
    block_doc = config.get(block, {})
    if isinstance(block_doc, dict) and "seed" in block_doc:
        return int(block_doc["seed"])
    env = os.environ.get(SEED_ENV)
    if env is not None:
        return int(env)
    return 0


def _fit_options(config: dict, seed: int) -> FitOptions:
    block = config.get("fit", {})
    if not isinstance(block, dict):
        raise ConfigError("fit", "must be an object")
    try:
        return FitOptions(
            starts=int(block.get("starts", 32)),
            max_iterations=int(block.get("max_iterations", 5000)),
            convergence=float(block.get("convergence", 1e-9)),
            boundary_tol=float(block.get("boundary_tol", 1e-4)),
            seed=seed,
        )
    except ModelError as exc:
        raise ConfigError("fit", str(exc)) from None


def _run_fit(config: dict, base: Path, seed: int) -> tuple[FitResult, PanelTable, PanelSchema]:
    table, schema = _load_table_from_config(config, base)
    spec = _spec_from_config(config, table, schema)
    fit = em_fit(spec, table, _fit_options(config, seed))
    fit.g_squared = g_squared(table, fit.params)
    return fit, table, schema


def _report_base(command: str, config: dict, seed: int) -> dict:
    return {
        "command": command,
        "artifact": "latent-chain",
        "version": __version__,
        "config_hash": config_digest(config),
        "seed": seed,
        "config": config,
    }


def _emit(doc: dict, out: str | None) -> Path | None:
    if out is None:
        json.dump(doc, sys.stdout, indent=2)
        sys.stdout.write("\n")
        return None
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_json(doc, path)
    return path


def cmd_fit(args) -> int:
    config, base = _load_config(args.config)
    seed = _effective_seed(args.seed, config, "fit")
    fit, table, _ = _run_fit(config, base, seed)
    doc = _report_base("fit", config, seed)
    doc["data"] = {"path": config["data"], "group_totals": fit.diagnostics.group_totals}
    doc["fit"] = fit_to_doc(fit)
    out_path = _emit(doc, args.out or config.get("output"))
    if out_path is not None and args.figures:
        save_transition_heatmaps(
            fit, list(table.groups), out_path.with_name(out_path.stem + "_transitions.png")
        )
    return 0 if fit.diagnostics.converged else 2


def cmd_bootstrap(args) -> int:
    config, base = _load_config(args.config)
    if "bootstrap" not in config:
        raise ConfigError("bootstrap", "required block for the bootstrap command")
    seed = _effective_seed(args.seed, config, "bootstrap")
    fit, table, _ = _run_fit(config, base, seed)
    block = config["bootstrap"]
    B = int(args.replicates or block.get("replicates", 500))
    report = bootstrap_gof(fit, fit.spec, table, B=B, seed=seed,
                           options=_fit_options(config, seed))
    doc = _report_base("bootstrap", config, seed)
    doc["data"] = {"path": config["data"], "group_totals": fit.diagnostics.group_totals}
    doc["fit"] = fit_to_doc(fit)
    doc["bootstrap"] = {
        "observed_lr": report.observed_lr,
        "p_value": report.p_value,
        "exceed_count": report.exceed_count,
        "B": report.B,
        "seed": report.seed,
        "fallback_starts": 4,
        "replicates": [{"lr": lr, "converged": conv} for lr, conv in report.replicates],
    }
    out_path = _emit(doc, args.out or config.get("output"))
    if out_path is not None:
        import csv as _csv

        with out_path.with_name(out_path.stem + "_replicates.csv").open(
            "w", newline="", encoding="utf-8"
        ) as fh:
            writer = _csv.writer(fh)
            writer.writerow(["replicate", "lr", "converged"])
            for i, (lr, conv) in enumerate(report.replicates, start=1):
                writer.writerow([i, lr, conv])
        if args.figures:
            save_bootstrap_histogram(
                report, out_path.with_name(out_path.stem + "_histogram.png"),
                df=fit.degrees_of_freedom,
            )
    return 0 if fit.diagnostics.converged else 2


def cmd_compare(args) -> int:
    config, base = _load_config(args.config)
    for key in ("restricted", "general"):
        if key not in config:
            raise ConfigError(key, "required (path or name of a fit config)")
    seed = _effective_seed(args.seed, config, "fit")
    fits = {}
    for key in ("restricted", "general"):
        value = str(config[key])
        candidate = base / value
        sub_config, sub_base = _load_config(str(candidate) if candidate.exists() else value)
        fit, _, _ = _run_fit(sub_config, sub_base, seed)
        fits[key] = fit
    try:
        report = compare_nested(fits["restricted"], fits["general"])
    except InferenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    doc = _report_base("compare", config, seed)
    doc["comparison"] = {
        "delta_lr": report.delta_lr,
        "delta_df": report.delta_df,
        "chi_square_p": report.chi_square_p,
        "warning": report.warning,
        "restricted": {"lr": fits["restricted"].g_squared, "df": fits["restricted"].degrees_of_freedom},
        "general": {"lr": fits["general"].g_squared, "df": fits["general"].degrees_of_freedom},
    }
    _emit(doc, args.out or config.get("output"))
    return 0


def _params_from_doc(doc: dict) -> tuple[ParameterSet, tuple[str, ...] | None]:
    if "fit" in doc and isinstance(doc["fit"], dict) and "parameters" in doc["fit"]:
        arrays = doc["fit"]["parameters"]
    elif "parameters" in doc:
        arrays = doc["parameters"]
    elif all(k in doc for k in ("gamma", "delta", "rho", "tau")):
        arrays = doc
    else:
        raise ConfigError("parameters", "no parameter arrays found in the file")
    params = ParameterSet(
        gamma=np.array(arrays["gamma"], dtype=float),
        delta=np.array(arrays["delta"], dtype=float),
        rho=np.array(arrays["rho"], dtype=float),
        tau=np.array(arrays["tau"], dtype=float),
    )
    cats = doc.get("categories")
    return params, tuple(cats) if cats else None


def _parse_sizes(value: str) -> dict[str, int]:
    sizes = {}
    for part in value.split(","):
        if "=" not in part:
            raise ConfigError("sizes", f"expected label=count, got {part!r}")
        label, _, raw = part.partition("=")
        try:
            sizes[label.strip()] = int(raw)
        except ValueError:
            raise ConfigError("sizes", f"count {raw!r} is not an integer") from None
    return sizes


def cmd_simulate(args) -> int:
    path = _resolve_config_path(args.config)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{path}: invalid JSON ({exc})") from None
    params, categories = _params_from_doc(doc)
    sizes = _parse_sizes(args.sizes)
    seed = args.seed if args.seed is not None else int(os.environ.get(SEED_ENV, 0))
    table = simulate(params, sizes, seed, category_labels=categories)
    text = write_panel_csv(table)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_replicate(args) -> int:
    exit_code, doc = run_replication(
        out_dir=args.out,
        seed=args.seed if args.seed is not None else int(os.environ.get(SEED_ENV, REPLICATION_SEED)),
        starts=args.starts,
        gender_doctoral=args.gender_doctoral,
        gender_postdoc=args.gender_postdoc,
        bootstrap_b=args.bootstrap,
        figures=args.figures,
    )
    text_path = Path(args.out) / "replication.txt"
    sys.stdout.write(text_path.read_text(encoding="utf-8"))
    if exit_code != 0:
        failures = [c for c in doc["checks"] if c["status"] == "fail"]
        print(f"\n{len(failures)} check(s) failed:", file=sys.stderr)
        for c in failures:
            print(f"  {c['table']} {c['name']}: expected {c['expected']}, got {c['actual']}",
                  file=sys.stderr)
    return exit_code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latent-chain",
        description="Latent Markov chain models for grouped categorical panel data",
    )
    parser.add_argument("--version", action="version", version=f"latent-chain {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config_required=True):
        if config_required:
            p.add_argument("--config", required=True,
                           help="config file path or bundled config name")
        p.add_argument("--seed", type=int, default=None,
                       help=f"seed override (fallback: config, then ${SEED_ENV})")
        p.add_argument("--out", default=None, help="output path")

    p_fit = sub.add_parser("fit", help="fit one model and write a JSON report")
    add_common(p_fit)
    p_fit.add_argument("--no-figures", dest="figures", action="store_false",
                       help="skip figure rendering next to the report")
    p_fit.set_defaults(func=cmd_fit)

    p_boot = sub.add_parser("bootstrap", help="fit plus parametric-bootstrap goodness of fit")
    add_common(p_boot)
    p_boot.add_argument("--replicates", type=int, default=None, help="override bootstrap B")
    p_boot.add_argument("--no-figures", dest="figures", action="store_false")
    p_boot.set_defaults(func=cmd_bootstrap)

    p_cmp = sub.add_parser("compare", help="likelihood-ratio test of two nested fit configs")
    add_common(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    p_sim = sub.add_parser("simulate", help="draw a table from fitted or explicit parameters")
    add_common(p_sim)
    p_sim.add_argument("--sizes", required=True, help="per-group sizes, e.g. doctoral=1474,post-doctoral=480")
    p_sim.set_defaults(func=cmd_simulate)

    p_rep = sub.add_parser("replicate", help="replicate every published table from the bundled data")
    p_rep.add_argument("--out", default="replication_output", help="output directory")
    p_rep.add_argument("--seed", type=int, default=None)
    p_rep.add_argument("--starts", type=int, default=32)
    p_rep.add_argument("--gender-doctoral", default=None,
                       help="real doctoral gender-split CSV (otherwise the bundled fixture is used)")
    p_rep.add_argument("--gender-postdoc", default=None,
                       help="real post-doctoral gender-split CSV")
    p_rep.add_argument("--bootstrap", type=int, default=0,
                       help="bootstrap replicates for the gender models (0 = off)")
    p_rep.add_argument("--no-figures", dest="figures", action="store_false")
    p_rep.set_defaults(func=cmd_replicate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, PanelDataError, ModelError, InferenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
