"""Batch runner: ``interaction-groups --config CONFIG [--out DIR]``.

``CONFIG`` is a JSON file or the name of a bundled config (see
``--list-configs``).  Exit status is 0 when every mandatory check passes, 1 on
a failed check and 2 on a config error.
"""
from __future__ import annotations

import argparse
import json
import platform
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .algebra import AlgState, FdAlgebra, LinMap
from .groups import FiniteGroup, FreeAbelianGroup, GroupError, cyclic, symmetric, word_identity_suite
from .interaction import DEFAULT_WINDOW, InteractionGroup, commuting_power_rule, full_interaction_report
from .report import Report

CONFIG_SCHEMA_ID = "interaction-groups/config/v1"
REPORT_SCHEMA_ID = "interaction-groups/report/v1"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def load_schema(kind: str = "config") -> dict:
    text = resources.files(__package__).joinpath(f"schemas/{kind}.schema.json").read_text("utf-8")
    return json.loads(text)


def bundled_configs() -> list[str]:
    root = resources.files(__package__).joinpath("configs")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def _read_config(ref: str) -> dict:
    path = Path(ref)
    if path.exists():
        text = path.read_text("utf-8")
    elif ref in bundled_configs():
        text = resources.files(__package__).joinpath(f"configs/{ref}.json").read_text("utf-8")
    else:
        raise ConfigError("--config", f"no file or bundled config named {ref!r}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"invalid JSON ({exc})") from None


def validate(cfg: dict) -> None:
    errors = sorted(jsonschema.Draft202012Validator(load_schema()).iter_errors(cfg), key=lambda e: list(e.path))
    if errors:
        err = errors[0]
        where = ".".join(str(p) for p in err.path) or "<root>"
        raise ConfigError(where, err.message)


# --------------------------------------------------------------------------
# building objects from config fragments

def parse_matrix(data, field: str, shape: tuple[int, int] | None = None) -> np.ndarray:
    rows = []
    for i, row in enumerate(data):
        rows.append([complex(x[0], x[1]) if isinstance(x, list) else complex(x) for x in row])
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ConfigError(field, "rows have different lengths")
    M = np.array(rows, dtype=complex)
    if M.shape[0] != M.shape[1]:
        raise ConfigError(field, f"matrix must be square, got {M.shape[0]}x{M.shape[1]}")
    if shape is not None and M.shape != shape:
        raise ConfigError(field, f"expected a {shape[0]}x{shape[1]} matrix, got {M.shape[0]}x{M.shape[1]}")
    return M


def build_group(frag: dict, field: str = "group"):
    try:
        kind = frag["kind"]
        if kind == "cyclic":
            return cyclic(frag["order"])
        if kind == "symmetric":
            return symmetric(frag["degree"])
        if kind == "table":
            return FiniteGroup(frag["table"])
        return FreeAbelianGroup(frag["rank"])
    except KeyError as exc:
        raise ConfigError(field, f"missing {exc.args[0]!r} for kind {frag.get('kind')!r}") from None
    except GroupError as exc:
        raise ConfigError(field, str(exc)) from None


def build_element(G, data, field: str):
    try:
        return G.canon(tuple(data) if isinstance(data, list) else data)
    except GroupError as exc:
        raise ConfigError(field, str(exc)) from None


def build_map(alg: FdAlgebra, frag: dict, field: str) -> LinMap:
    if "identity" in frag:
        return LinMap.identity(alg)
    if "matrix" in frag:
        return LinMap(alg, parse_matrix(frag["matrix"], f"{field}.matrix", (alg.d, alg.d)))
    u = parse_matrix(frag["ad"], f"{field}.ad", (alg.n, alg.n))
    if np.linalg.norm(u.conj().T @ u - np.eye(alg.n)) > 1e-9:
        raise ConfigError(f"{field}.ad", "matrix is not unitary")
    if not alg.contains(u):
        raise ConfigError(f"{field}.ad", "unitary is not block diagonal for the declared algebra")
    uc = u.conj().T
    return LinMap.from_function(alg, lambda a: u @ a @ uc)


def _require(cfg: dict, key: str) -> object:
    if key not in cfg:
        raise ConfigError(key, f"required for scenario {cfg['scenario']!r}")
    return cfg[key]


def build_interaction(cfg: dict) -> InteractionGroup:
    G = build_group(_require(cfg, "group"))
    alg = FdAlgebra(_require(cfg, "algebra")["blocks"])
    maps = {}
    for i, entry in enumerate(_require(cfg, "interaction")):
        g = build_element(G, entry["element"], f"interaction.{i}.element")
        maps[g] = build_map(alg, entry["map"], f"interaction.{i}.map")
    name = cfg.get("name", "config")
    if G.finite:
        missing = [g for g in G.window() if g != G.identity and g not in maps]
        if missing:
            raise ConfigError("interaction", f"no map for group elements {missing}")
        return InteractionGroup(G, alg, maps, name=name)
    missing = [g for g in G.generators() if g not in maps]
    if missing:
        raise ConfigError("interaction", f"Z^k needs maps on every +-e_i; missing {missing}")
    return InteractionGroup(G, alg, rule=commuting_power_rule(G, maps), name=name)


def build_state(cfg: dict, alg: FdAlgebra) -> AlgState:
    frag = cfg.get("state", "trace")
    if frag == "trace":
        return AlgState.trace(alg)
    rho = parse_matrix(frag["density"], "state.density", (alg.n, alg.n))
    try:
        return AlgState(alg, rho)
    except ValueError as exc:
        raise ConfigError("state.density", str(exc)) from None


# --------------------------------------------------------------------------
# scenarios

@dataclass
class Settings:
    tol: float
    window: int
    seed: int


def run_verify_interaction(cfg: dict, s: Settings) -> Report:
    ig = build_interaction(cfg)
    return full_interaction_report(ig, s.window, s.tol, word_length=cfg.get("max_length", 3), seed=s.seed)


def run_word_identities(cfg: dict, s: Settings) -> Report:
    G = build_group(_require(cfg, "group"))
    letters = [build_element(G, x, f"letters.{i}") for i, x in enumerate(_require(cfg, "letters"))]
    return word_identity_suite(G, letters, cfg.get("max_length", 4))


def run_regular_rep(cfg: dict, s: Settings) -> Report:
    from .covariance import redundancy_scan, verify_covariant
    from .modules import regular_rep

    ig = build_interaction(cfg)
    if not ig.group.finite:
        raise ConfigError("group", "the regular representation needs a finite group")
    rep = regular_rep(ig)
    out = Report(f"regular representation of {ig.name}")
    out.extend(verify_covariant(rep, tol=s.tol))
    out.extend(redundancy_scan(rep))
    out.data["dim"] = rep.dim
    return out


def run_gns_crossed_product(cfg: dict, s: Settings) -> Report:
    from .covariance import amplify, crossed_product_concrete, gns_report, norm_formula_check, two_model_check
    from .modules import regular_rep

    ig = build_interaction(cfg)
    if not ig.group.finite:
        raise ConfigError("group", "the concrete crossed product needs a finite group")
    state = build_state(cfg, ig.alg)
    rep, out = gns_report(ig, state, s.tol)
    out.title = f"GNS and crossed product of {ig.name}"
    out.extend(crossed_product_concrete(amplify(rep), seed=s.seed).report)
    out.extend(norm_formula_check(rep, seed=s.seed))
    out.extend(two_model_check(rep, regular_rep(ig), seed=s.seed))
    return out


def run_redundancy_scan(cfg: dict, s: Settings) -> Report:
    from .covariance import corrupted_rep, gns_from_state, redundancy_scan

    ig = build_interaction(cfg)
    rep = gns_from_state(ig, build_state(cfg, ig.alg), tol=s.tol)
    out = redundancy_scan(rep, max_mu=cfg.get("max_length", 3))
    if cfg.get("negative_control", False):
        out.extend(redundancy_scan(corrupted_rep(rep), max_mu=cfg.get("max_length", 3), expect_zero=False))
    return out


def run_extend(cfg: dict, s: Settings) -> Report:
    from .extension import construct_V, free_abelian_system, single_endo_extend, verify_system

    ext = _require(cfg, "extension")
    alg = FdAlgebra(_require(cfg, "algebra")["blocks"])
    if ext["mode"] == "single":
        for key in ("alpha", "expectation"):
            if key not in ext:
                raise ConfigError(f"extension.{key}", "required for mode 'single'")
        alpha = build_map(alg, ext["alpha"], "extension.alpha")
        E = build_map(alg, ext["expectation"], "extension.expectation")
        try:
            return single_endo_extend(alpha, E, s.window, s.tol).report
        except ValueError as exc:
            raise ConfigError("extension", str(exc)) from None
    alphas = [build_map(alg, m, f"extension.alphas.{i}") for i, m in enumerate(ext.get("alphas", []))]
    ells = [build_map(alg, m, f"extension.transfers.{i}") for i, m in enumerate(ext.get("transfers", []))]
    if not alphas or len(alphas) != len(ells):
        raise ConfigError("extension.transfers", "need one transfer operator per endomorphism")
    system = free_abelian_system(alg, alphas, ells)
    out = verify_system(system, s.window, s.tol)
    if not out.ok:
        return out
    try:
        return out.extend(construct_V(system, s.window, s.tol).report)
    except ValueError as exc:
        from .report import FINDING, Check
        out.add(Check("extension.obstructed", "alpha_p ell_p fail to commute, so no extension exists",
                      FINDING, witness=str(exc)))
        return out


def run_fock(cfg: dict, s: Settings) -> Report:
    from .fock import DELTA_THRESHOLD, INTERIOR, counterexample_pipeline

    frag = _require(cfg, "fock")
    a = frag["a"]
    a = complex(a[0], a[1]) if isinstance(a, list) else complex(a)
    if a.imag == 0:
        a = a.real
    Ns = frag["N"] if isinstance(frag["N"], list) else [frag["N"]]
    interior = frag.get("interior", INTERIOR)
    for N in Ns:
        if N <= interior + 1:
            raise ConfigError("fock.N", f"N = {N} leaves no interior for a band of {interior}")
    if abs(a) >= 1:
        raise ConfigError("fock.a", "need |a| < 1")
    out = Report(f"Toeplitz counterexample, a = {a}")
    deltas = {}
    for N in Ns:
        r = counterexample_pipeline(a, N, frag.get("threshold", DELTA_THRESHOLD), interior,
                                    frag.get("surrogate_dim", 4))
        out.extend(r.checks)
        deltas[str(N)] = r.data["range_commutator"]
        out.data.setdefault("closed_form", r.data["closed_form"])
        out.data.setdefault("surrogate_commutator", r.data["surrogate_commutator"])
    out.data["range_commutator"] = deltas
    if len(deltas) > 1:
        vals = np.array(list(deltas.values()))
        out.data["relative_variation"] = float((vals.max() - vals.min()) / max(vals.max(), 1e-300))
    return out


SCENARIOS = {
    "verify-interaction": run_verify_interaction,
    "word-identities": run_word_identities,
    "regular-rep": run_regular_rep,
    "gns-crossed-product": run_gns_crossed_product,
    "redundancy-scan": run_redundancy_scan,
    "extend": run_extend,
    "fock-counterexample": run_fock,
}


# --------------------------------------------------------------------------
# output

def versions() -> dict:
    import scipy

    return {"interaction_groups": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def report_document(report: Report, cfg: dict) -> dict:
    return {"schema": REPORT_SCHEMA_ID, "scenario": cfg["scenario"], "config": cfg,
            "versions": versions(), **report.to_dict()}


def emit(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def parse_report(text: str) -> tuple[Report, dict]:
    doc = json.loads(text)
    return Report.from_dict(doc), doc


def run(cfg: dict, tol: float | None = None, window: int | None = None, seed: int | None = None) -> Report:
    validate(cfg)
    s = Settings(tol if tol is not None else cfg.get("tol", 1e-9),
                 window if window is not None else cfg.get("window", DEFAULT_WINDOW if cfg["scenario"] != "extend" else 2),
                 seed if seed is not None else cfg.get("seed", 0))
    return SCENARIOS[cfg["scenario"]](cfg, s)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="interaction-groups", description=__doc__.split("\n")[0])
    p.add_argument("--config", help="config JSON path or bundled config name")
    p.add_argument("--out", type=Path, help="directory for report files (default: print only)")
    p.add_argument("--tol", type=float, help="check tolerance (default: config value or 1e-9)")
    p.add_argument("--window", type=int, help="window radius (default: config value or 3; 2 for extend)")
    p.add_argument("--seed", type=int, help="random seed (default: config value or 0)")
    p.add_argument("--format", choices=["json", "text", "both"], default="both",
                   help="report files to write (default: both)")
    p.add_argument("--list-configs", action="store_true", help="list bundled configs and exit")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.list_configs:
        print("\n".join(bundled_configs()))
        return EXIT_OK
    if not args.config:
        print("error: --config is required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = _read_config(args.config)
        report = run(cfg, args.tol, args.window, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = report.text()
    print(text)
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        stem = cfg.get("name", Path(args.config).stem)
        if args.format in ("json", "both"):
            (args.out / f"{stem}.report.json").write_text(emit(report_document(report, cfg)), encoding="utf-8")
        if args.format in ("text", "both"):
            (args.out / f"{stem}.report.txt").write_text(text + "\n", encoding="utf-8")
    return EXIT_OK if report.ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
