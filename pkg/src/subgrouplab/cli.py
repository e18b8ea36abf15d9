"""Command-line front door: one experiment per config, CSV or JSON out."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import traceback
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import jsonschema
import numpy as np

from . import __version__
from . import cohomology as coh
from . import functorial as fn
from . import groups as gr
from . import isolation as iso
from . import lie
from . import rotations as rot
from .finite import FiniteGroup
from .hyperspace import converging_sequence_report, report_csv
from .intrep import (IntegerRep, RationalLattice, glz_conjugate, invariant_lattice_quotient,
                     minimality_check)

OUT_ENV = "SUBGROUPLAB_OUT"

_GROUP = {"oneOf": [{"type": "string"}, {"type": "object", "required": ["type"]}]}
_ALGEBRA = {"oneOf": [{"type": "string"}, {"type": "object", "required": ["c", "gram"]}]}
_SUBGROUP = {"type": "object", "required": ["kind"],
             "properties": {"kind": {"enum": ["cyclic", "dihedral", "T", "O", "I", "grid"]},
                            "n": {"type": "integer", "minimum": 1}}}
_FGROUP = {"oneOf": [{"type": "string", "pattern": "^(C[0-9]+|D[0-9]+|K4|S3|trivial)$"},
                     {"type": "object", "required": ["elements", "table"]}]}

PARAM_SCHEMAS: dict[str, dict] = {
    "approximate": {"properties": {"group": _GROUP,
                                   "ns": {"type": "array", "items": {"type": "integer", "minimum": 1},
                                          "minItems": 1},
                                   "eps": {"type": "number", "exclusiveMinimum": 0}}},
    "isolate": {"properties": {"algebra": _ALGEBRA, "algebras": {"type": "array", "items": _ALGEBRA}}},
    "mz-probe": {"properties": {"group": _GROUP, "H": _SUBGROUP, "K": _SUBGROUP,
                                "budget": {"type": "integer", "minimum": 1},
                                "restarts": {"type": "integer", "minimum": 0},
                                "tol": {"type": "number", "exclusiveMinimum": 0},
                                "eps": {"type": "number", "exclusiveMinimum": 0}}},
    "turing-gap": {"properties": {"group": {"enum": ["SO3", "SU2"]},
                                  "mesh": {"type": "number", "exclusiveMinimum": 0},
                                  "max_order": {"type": "integer", "minimum": 1}}},
    "myers": {"properties": {"algebra": _ALGEBRA, "group": {"enum": ["SO3", "SU2"]},
                             "delta": {"type": "number", "exclusiveMinimum": 0},
                             "mesh": {"type": "number", "exclusiveMinimum": 0},
                             "coverage": {"type": "boolean"}}},
    "h2-table": {"properties": {"cases": {"type": "array", "items": {
        "type": "object", "required": ["F", "factors"],
        "properties": {"F": _FGROUP, "factors": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                       "action": {"type": "object"}}}}}},
    "minimal-classes": {"properties": {"reps": {"type": "array", "items": {
        "oneOf": [{"enum": ["alpha", "beta", "Z4-rotation", "Z2-negation", "trivial"]},
                  {"type": "object", "required": ["generator"]},
                  {"type": "object", "required": ["elements", "table"]}]}}}},
    "example-3-1": {"properties": {}},
    "functorial-probe": {"properties": {"cases": {"type": "array",
                                                  "items": {"enum": list(fn.PROBE_CASES)}},
                                        "round_trip": {"type": "boolean"}}},
}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["experiment"],
    "properties": {
        "experiment": {"enum": list(PARAM_SCHEMAS)},
        "params": {"type": "object"},
        "seed": {"type": "integer"},
        "output": {"type": "string"},
    },
}

DESCRIPTIONS = {
    "approximate": "d_H of (C_n)^m x| F to the whole group, one CSV row per n",
    "isolate": "isolation verdicts from the Lie algebra of the identity component",
    "mz-probe": "search for g with g H g^-1 close to K",
    "turing-gap": "smallest d_H from a finite rotation group to the whole group",
    "myers": "Ricci lower bound, Myers radius and exponential coverage",
    "h2-table": "second cohomology of finite modules",
    "minimal-classes": "minimality reports for integer representations",
    "example-3-1": "the G_alpha / G_beta quotient and center example",
    "functorial-probe": "round trips and openness probes for subgroup functors",
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict
    seed: int
    output: str | None

    def canonical(self) -> str:
        return json.dumps({"experiment": self.experiment, "params": self.params, "seed": self.seed},
                          sort_keys=True, separators=(",", ":"))

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


def load_config(data: Any, seed: int | None = None) -> ExperimentConfig:
    try:
        jsonschema.validate(data, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(exc.message) from None
    exp = data["experiment"]
    # flat keys next to "experiment" are params too
    params = {k: v for k, v in data.items() if k not in CONFIG_SCHEMA["properties"]}
    params.update(data.get("params", {}))
    schema = dict(PARAM_SCHEMAS[exp], type="object", additionalProperties=False)
    try:
        jsonschema.validate(params, schema)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"{exp}: {exc.message}") from None
    s = seed if seed is not None else int(data.get("seed", 0))
    return ExperimentConfig(exp, params, s, data.get("output"))


# ---------------------------------------------------------------------------
# parameter parsing
# ---------------------------------------------------------------------------

def _algebra(desc) -> lie.LieAlgebraData:
    if isinstance(desc, dict):
        return lie.LieAlgebraData.from_json(desc)
    parts = []
    for tok in desc.replace(" ", "").split("+"):
        t = tok.lower()
        if t in ("so3", "so(3)"):
            parts.append(lie.so3())
        elif t in ("su2", "su(2)"):
            parts.append(lie.su2())
        elif t in ("u2", "u(2)"):
            parts.append(lie.u2())
        elif t.startswith("r") and t[1:].isdigit():
            parts.append(lie.abelian(int(t[1:])))
        elif t == "r":
            parts.append(lie.abelian(1))
        else:
            raise ConfigError(f"unknown algebra {tok!r}")
    return parts[0] if len(parts) == 1 else lie.direct_sum(*parts)


def _finite_group(desc) -> FiniteGroup:
    if isinstance(desc, dict):
        return FiniteGroup.from_json(desc)
    if desc == "trivial":
        return FiniteGroup.trivial()
    if desc == "K4":
        return FiniteGroup.direct_product(FiniteGroup.cyclic(2), FiniteGroup.cyclic(2))
    if desc == "S3":
        return FiniteGroup.symmetric(3)
    n = int(desc[1:])
    return FiniteGroup.cyclic(n) if desc[0] == "C" else FiniteGroup.dihedral(n)


def _coord(v) -> Fraction:
    return Fraction(str(v))


def _subgroup(G: gr.CompactGroup, desc: dict) -> gr.SubgroupHandle:
    kind = desc["kind"]
    if kind == "grid":
        H: gr.SubgroupHandle = gr.CyclicGridSubgroup(G, int(desc.get("n", 1)))
    else:
        if not isinstance(G, gr.MatrixGroup):
            raise ConfigError(f"subgroup kind {kind!r} needs SO3 or SU2")
        n = int(desc.get("n", 1))
        mats = {"cyclic": lambda: rot.cyclic_rotations(n), "dihedral": lambda: rot.dihedral_rotations(n),
                "T": rot.tetrahedral_rotations, "O": rot.octahedral_rotations,
                "I": rot.icosahedral_rotations}[kind]()
        if G.kind == "SU2":
            mats = rot.binary_lift(np.asarray(mats))
        H = gr.FiniteSubgroup(G, tuple(mats), kind + (str(n) if kind in ("cyclic", "dihedral") else ""))
    by = desc.get("conjugate")
    if by is None:
        return H
    if isinstance(G, gr.MatrixGroup):
        g = G.exp(np.asarray(by, dtype=float))[0]
    elif isinstance(G, gr.SemidirectGroup):
        g = G.element([_coord(v) for v in by["t"]], str(by.get("f", G.F.identity)))
    else:
        g = G.element([_coord(v) for v in by])
    return gr.conjugate_subgroup(H, g)


def _rep(desc) -> IntegerRep:
    if desc == "alpha":
        return IntegerRep.example_alpha()
    if desc == "beta":
        return IntegerRep.example_beta()
    if desc == "Z4-rotation":
        return IntegerRep.from_generator([[0, -1], [1, 0]], name="Z4-rotation")
    if desc == "Z2-negation":
        return IntegerRep.from_generator([[-1]], name="Z2-negation")
    if desc == "trivial":
        return IntegerRep.trivial(1)
    if "generator" in desc:
        return IntegerRep.from_generator(desc["generator"], name=desc.get("name", ""))
    return IntegerRep.from_json(desc)


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


# ---------------------------------------------------------------------------
# experiments; each returns ("csv", text) or ("json", object)
# ---------------------------------------------------------------------------

def run_approximate(p: dict, seed: int):
    G = gr.group_from_json(p.get("group", "G_alpha"))
    ns = p.get("ns", [2, 4, 8, 16, 32])
    eps = p.get("eps", 1.0 / (10 * max(ns)))
    Ks = [K.sample() for K in iso.approximation_sequence(G, ns)]
    ref = G.eps_net(eps)
    rows = converging_sequence_report(Ks, ref, labels=ns)
    return "csv", report_csv(rows)


def run_isolate(p: dict, seed: int):
    specs = p.get("algebras") or [p.get("algebra", "so3")]
    out = []
    for s in specs:
        L = _algebra(s)
        v = iso.isolation_verdict(L)
        out.append(dict(algebra=s if isinstance(s, str) else L.name, dim=L.n, **v.to_json()))
    return "json", {"verdicts": out}


def run_mz_probe(p: dict, seed: int):
    G = gr.group_from_json(p.get("group", "SO3"))
    default = {"kind": "cyclic", "n": 6} if isinstance(G, gr.MatrixGroup) else {"kind": "grid", "n": 4}
    H = _subgroup(G, p.get("H", dict(default, conjugate=[0.3, -0.2, 0.1])
                           if isinstance(G, gr.MatrixGroup) else default))
    K = _subgroup(G, p.get("K", default))
    r = iso.conjugacy_search(H, K, budget=p.get("budget", 2000), tol=p.get("tol", 1e-6), seed=seed,
                             restarts=p.get("restarts", 4), eps=p.get("eps"))
    return "json", {"residual": r.residual, "baseline": r.baseline, "status": r.status,
                    "tolerance": r.tolerance, "error_bound": r.error_bound, "iterations": r.iterations,
                    "best_g": _jsonable(r.best_g)}


def run_turing_gap(p: dict, seed: int):
    G = gr.MatrixGroup(p.get("group", "SO3"))
    cands = iso.default_rotation_candidates(G, p.get("max_order", 60))
    r = iso.turing_gap(G, cands, mesh=p.get("mesh", 0.02))
    return "json", {"min_gap": r.min_gap, "error_bound": r.error_bound, "argmin": r.argmin,
                    "certified_positive": r.certified_positive, "mesh": r.mesh,
                    "gaps": {k: {"value": v, "exact": r.exact[k]} for k, v in r.gaps.items()}}


def run_myers(p: dict, seed: int):
    desc = p.get("algebra", "so3")
    L = _algebra(desc)
    ric = lie.ricci_min(L, exact=True)
    delta_exact = lie.myers_bound(L, exact=True)
    out = {"algebra": desc if isinstance(desc, str) else L.name, "ric_min": float(ric),
           "ric_min_exact": str(ric), "delta": float(delta_exact), "delta_exact": str(delta_exact)}
    if p.get("coverage", True):
        kind = p.get("group") or ("SU2" if str(desc).lower().startswith("su") else "SO3")
        delta = p.get("delta", float(delta_exact))
        rep = lie.exp_coverage_check(gr.MatrixGroup(kind), L, delta, p.get("mesh", 0.05))
        out.update(group=kind, coverage_delta=delta, coverage=rep.covered, coverage_gap=rep.gap,
                   coverage_threshold=rep.threshold)
    return "json", out


DEFAULT_H2_CASES = [
    {"F": "C2", "factors": [2]},
    {"F": "C2", "factors": [3]},
    {"F": "C3", "factors": [3]},
    {"F": "C2", "factors": [4], "action": {"1": [[-1]]}},
    {"F": "K4", "factors": [2]},
    {"F": "S3", "factors": [2]},
    {"F": "S3", "factors": [3]},
    {"F": "C6", "factors": [3, 3, 3]},
]


def run_h2_table(p: dict, seed: int):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["F", "order", "factors", "action", "h2"])
    for case in p.get("cases", DEFAULT_H2_CASES):
        F = _finite_group(case["F"])
        action = case.get("action")
        M = (coh.FiniteModule.from_generators(F, case["factors"], action) if action
             else coh.FiniteModule.trivial_action(F, case["factors"]))
        inv = coh.h2(F, M)
        w.writerow([case["F"] if isinstance(case["F"], str) else F.name, len(F),
                    " ".join(map(str, M.factors)), json.dumps(action, sort_keys=True) if action else "trivial",
                    " ".join(map(str, inv)) or "0"])
    return "csv", buf.getvalue()


def run_minimal_classes(p: dict, seed: int):
    out = []
    for s in p.get("reps", ["Z4-rotation", "Z2-negation", "alpha", "beta"]):
        R = _rep(s)
        out.append(dict(rep=s if isinstance(s, str) else R.name, m=R.m, **minimality_check(R).to_json()))
    return "json", {"reports": out}


def run_example_3_1(p: dict, seed: int):
    alpha, beta = IntegerRep.example_alpha(), IntegerRep.example_beta()
    half = Fraction(1, 2)
    qa = invariant_lattice_quotient(alpha, RationalLattice([[half, half]]))
    qb = invariant_lattice_quotient(beta, RationalLattice([[half, 0]]))
    conj = glz_conjugate(qb, alpha)
    return "json", {
        "alpha_quotient": qa.to_json()["matrices"],
        "alpha_quotient_equals_beta": qa.matrices == beta.matrices,
        "beta_quotient": qb.to_json()["matrices"],
        "beta_quotient_conjugate_to_alpha": conj.found,
        "conjugator": [list(map(int, r)) for r in conj.P] if conj.found else None,
        "center_components": {"G_alpha": list(gr.center_components(gr.group_alpha())),
                              "G_beta": list(gr.center_components(gr.group_beta()))},
    }


def run_functorial_probe(p: dict, seed: int):
    out: dict[str, Any] = {"probes": {}}
    for name in p.get("cases", list(fn.PROBE_CASES)):
        f, K, nbhd, battery = fn.PROBE_CASES[name]()
        out["probes"][name] = fn.openness_probe(f, K, nbhd, battery).to_json()
    if p.get("round_trip", True):
        rows = []
        for label, f, L in fn.round_trip_corpus():
            est, err = fn.round_trip(f, L, eps=0.1)
            rows.append({"pair": label, "estimate": est, "error_bound": err, "ok": bool(est <= err)})
        out["round_trips"] = rows
    return "json", out


EXPERIMENTS: dict[str, Callable] = {
    "approximate": run_approximate,
    "isolate": run_isolate,
    "mz-probe": run_mz_probe,
    "turing-gap": run_turing_gap,
    "myers": run_myers,
    "h2-table": run_h2_table,
    "minimal-classes": run_minimal_classes,
    "example-3-1": run_example_3_1,
    "functorial-probe": run_functorial_probe,
}


def provenance(cfg: ExperimentConfig) -> dict:
    return {"tool": "subgrouplab", "version": __version__, "experiment": cfg.experiment,
            "seed": cfg.seed, "config_sha256": cfg.sha256}


def render(cfg: ExperimentConfig, kind: str, body) -> str:
    prov = provenance(cfg)
    if kind == "csv":
        head = "".join(f"# {k}: {v}\n" for k, v in prov.items())
        return head + body
    return json.dumps({"provenance": prov, "result": _jsonable(body)}, indent=2, sort_keys=True) + "\n"


def run(cfg: ExperimentConfig, out_dir: Path) -> tuple[int, Path]:
    """Run one experiment and write its artifact; returns (exit status, path)."""
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        kind, body = EXPERIMENTS[cfg.experiment](cfg.params, cfg.seed)
    except Exception as exc:  # failures become data
        path = out_dir / f"{cfg.experiment}.error.json"
        rec = {"provenance": provenance(cfg),
               "error": {"type": type(exc).__name__, "message": str(exc),
                         "where": traceback.extract_tb(exc.__traceback__)[-1].name}}
        path.write_text(json.dumps(rec, indent=2, sort_keys=True) + "\n")
        return 1, path
    path = out_dir / f"{cfg.experiment}.{kind}"
    path.write_text(render(cfg, kind, body))
    return 0, path


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="subgrouplab", description="Experiments on spaces of closed subgroups.")
    ap.add_argument("--config", help="experiment JSON file ('-' for stdin)")
    ap.add_argument("--seed", type=int, default=None, help="override the config seed")
    ap.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or the config)")
    ap.add_argument("--list-experiments", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.list_experiments:
        for name in EXPERIMENTS:
            print(f"{name:18s} {DESCRIPTIONS[name]}")
        return 0
    if not args.config:
        print("error: --config is required", file=sys.stderr)
        return 2
    try:
        text = sys.stdin.read() if args.config == "-" else Path(args.config).read_text()
        cfg = load_config(json.loads(text), args.seed)
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out or os.environ.get(OUT_ENV) or cfg.output or ".")
    status, path = run(cfg, out)
    print(path)
    if status:
        print(f"experiment failed, see {path}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
