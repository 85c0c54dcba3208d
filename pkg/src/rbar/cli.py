"""Batch front end: one JSON job in, one JSON result out.

Exit codes: 0 success or passed check, 1 failed check, 2 invalid input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Callable

import jsonschema
import numpy as np

from . import almeasure, frequency, harmonic, measure, projlim, su2

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2

DEFAULT_BASIS = [{"id": "one", "value": 1}]


class InvalidJob(ValueError):
    pass


# --- schemas ----------------------------------------------------------------

_RAT = {"type": ["string", "integer"]}
_FREQ = {"type": "array", "items": _RAT, "minItems": 1}
_TUPLE = {"type": "array", "items": _FREQ, "minItems": 1}
_BASIS = {
    "type": "array", "minItems": 1,
    "items": {
        "type": "object", "required": ["id", "value"],
        "properties": {"id": {"type": "string"}, "value": {"type": "number"}},
    },
}
_AP = {
    "type": "array",
    "items": {
        "type": "object", "required": ["freq"],
        "properties": {"freq": _FREQ, "re": {"type": "number"}, "im": {"type": "number"}},
        "additionalProperties": False,
    },
}
_C0 = {
    "type": "object", "required": ["kind"],
    "properties": {
        "kind": {"enum": ["zero", "gaussian", "lorentzian", "bump"]},
        "center": {"type": "number"},
        "width": {"type": "number", "exclusiveMinimum": 0},
        "amplitude": {"type": "number"},
        "n": {"type": "number", "minimum": 0},
    },
    "additionalProperties": False,
}
_FUNCTION = {
    "type": "object",
    "properties": {"c0": _C0, "ap": _AP},
    "additionalProperties": False,
}
_RHO = {
    "oneOf": [
        {"const": "tan_map"},
        {
            "type": "object", "required": ["base", "power"],
            "properties": {"base": {"const": "tan_map"}, "power": {"type": "number", "exclusiveMinimum": 0}},
            "additionalProperties": False,
        },
    ]
}
_MEASURE = {
    "type": "object", "required": ["rho", "t"],
    "properties": {"rho": _RHO, "t": {"type": "number", "minimum": 0, "maximum": 1}},
    "additionalProperties": False,
}
_QUAD = {
    "type": "object",
    "properties": {
        "abs_tol": {"type": "number", "exclusiveMinimum": 0},
        "max_subdivisions": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}
_POINT = {
    "oneOf": [
        {"type": "object", "required": ["real"], "properties": {"real": {"type": "number"}},
         "additionalProperties": False},
        {"type": "object", "required": ["bohr"], "additionalProperties": False,
         "properties": {"bohr": {
             "type": "object", "required": ["level", "angles"],
             "properties": {"level": _TUPLE, "angles": {"type": "array", "items": {"type": "number"}}},
         }}},
    ]
}
_LEVEL_POINT = {
    "oneOf": [
        {"type": "object", "required": ["circle"], "properties": {"circle": {"type": "number"}},
         "additionalProperties": False},
        {"type": "object", "required": ["torus"], "additionalProperties": False,
         "properties": {"torus": {"type": "array", "items": {"type": "number"}}}},
    ]
}
_VEC3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_WORDS = {
    "type": "array", "minItems": 1,
    "items": {
        "type": "array", "minItems": 1,
        "items": {
            "type": "object", "required": ["i", "p"],
            "properties": {"i": {"type": "integer", "minimum": 1}, "p": {"enum": [1, -1]}},
            "additionalProperties": False,
        },
    },
}


def _obj(required, props):
    return {"type": "object", "required": required,
            "properties": {"basis": _BASIS, "seed": {"type": "integer"}, **props},
            "additionalProperties": False}


SCHEMAS: dict[str, dict] = {
    "freq-indep": _obj(["freqs"], {"freqs": {"type": "array", "items": _FREQ}}),
    "freq-join": _obj(["L", "Lp"], {"L": _TUPLE, "Lp": _TUPLE}),
    "project": _obj(["point", "level"], {"point": _POINT, "level": _TUPLE}),
    "transition": _obj(["from_level", "to_level", "point"],
                       {"from_level": _TUPLE, "to_level": _TUPLE, "point": _LEVEL_POINT}),
    "verify-consistency": _obj(["L", "Lp"], {
        "L": _TUPLE, "Lp": _TUPLE,
        "max_exponent": {"type": "integer", "minimum": 1, "maximum": 12},
        "relation": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
    }),
    "integrate": _obj(["measure", "function"], {"measure": _MEASURE, "function": _FUNCTION, "quad": _QUAD}),
    "inner-product": _obj(["measure", "f", "g"],
                          {"measure": _MEASURE, "f": _FUNCTION, "g": _FUNCTION, "quad": _QUAD}),
    "isometry-check": _obj(["function", "from", "to"], {
        "function": _FUNCTION, "from": _MEASURE, "to": _MEASURE,
        "tol": {"type": "number", "exclusiveMinimum": 0}, "quad": _QUAD,
    }),
    "jons-check": _obj(["ap_family"], {
        "candidate": {"oneOf": [{"type": "null"}, _MEASURE]},
        "c0_family": {"type": "array", "items": _C0},
        "ap_family": {"type": "array", "items": _AP, "minItems": 1},
        "probe_n": {"type": "number", "exclusiveMinimum": 0},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "quad": _QUAD,
    }),
    "holonomy": _obj(["kind"], {
        "kind": {"enum": ["linear", "circular"]},
        "c": {"type": "number"},
        "cs": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "l": {"type": "number"},
        "v": _VEC3,
        "tau": {"type": "number"},
        "r": {"type": "number"},
        "n": _VEC3,
    }),
    "circle-lemma": _obj(["tau", "r", "epsilon"], {
        "tau": {"type": "number", "exclusiveMinimum": 0},
        "r": {"type": "number", "exclusiveMinimum": 0},
        "epsilon": {"type": "number", "exclusiveMinimum": 0},
        "grid": {
            "type": "object",
            "properties": {
                "c_max": {"type": "number"},
                "points": {"type": "integer"},
                "band_samples": {"type": "integer"},
                "n_max": {"type": "integer"},
                "merge_n_max": {"type": "integer"},
                "footnote_n_max": {"type": "integer"},
                "witness_draws": {"type": "integer"},
            },
            "additionalProperties": False,
        },
    }),
    "al-verify": _obj(["spec"], {
        "spec": {
            "type": "object", "required": ["k", "k_prime", "words"],
            "properties": {"k": {"type": "integer", "minimum": 1},
                           "k_prime": {"type": "integer", "minimum": 1}, "words": _WORDS},
            "additionalProperties": False,
        },
        "N": {"type": "integer", "minimum": 10000},
        "streams": {"type": "integer", "minimum": 1, "maximum": 64},
        "validate": {"type": "boolean"},
    }),
}

JOB_SCHEMA = {
    "type": "object", "required": ["command", "payload"],
    "properties": {
        "command": {"enum": sorted(SCHEMAS)},
        "payload": {"type": "object"},
        "seed": {"type": "integer"},
    },
    "additionalProperties": False,
}


def _validate(instance, schema, where: str):
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(instance), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        path = "/".join(str(p) for p in e.absolute_path)
        raise InvalidJob(f"{where}/{path}: {e.message}" if path else f"{where}: {e.message}")


# --- payload decoding -------------------------------------------------------

def _ctx(payload) -> frequency.FrequencyContext:
    return frequency.FrequencyContext.from_json(payload.get("basis", DEFAULT_BASIS))


def _freq(ctx, coords) -> frequency.Frequency:
    return ctx.freq(*coords)


def _tuple(ctx, data) -> frequency.FrequencyTuple:
    return frequency.FrequencyTuple.from_json(ctx, data)


def _c0(spec: dict | None) -> harmonic.C0Function:
    if spec is None or spec["kind"] == "zero":
        return harmonic.ZERO_C0
    kind = spec["kind"]
    if kind == "bump":
        return measure.bump_probe(spec.get("n", 1.0), spec.get("width", 1.0))
    c, w, a = spec.get("center", 0.0), spec.get("width", 1.0), spec.get("amplitude", 1.0)
    if kind == "gaussian":
        return harmonic.C0Function(lambda x: a * math.exp(-(((x - c) / w) ** 2)),
                                   lambda x: abs(a) * math.exp(-(((x - c) / w) ** 2)), label="gaussian")
    return harmonic.C0Function(lambda x: a / (1.0 + ((x - c) / w) ** 2),
                               lambda x: abs(a) / (1.0 + ((x - c) / w) ** 2), label="lorentzian")


def _function(ctx, spec: dict) -> harmonic.QuantumFunction:
    ap = harmonic.APPolynomial.from_json(ctx, spec.get("ap", []))
    return harmonic.QuantumFunction(ctx, _c0(spec.get("c0")), ap)


_RHO_CACHE: dict = {}


def _rho(spec) -> measure.Parametrization:
    if spec == "tan_map":
        return measure.tan_map()
    p = float(spec["power"])
    if p == 1.0:
        return measure.tan_map()
    key = ("tan_map", p)
    if key not in _RHO_CACHE:
        _RHO_CACHE[key] = measure.tan_map().precompose(
            lambda u: u ** p, lambda s: s ** (1.0 / p), lambda u: p * u ** (p - 1.0),
            label=f"tan_map∘u^{p:g}",
        )
    return _RHO_CACHE[key]


def _measure(spec) -> measure.MeasureDescriptor:
    return measure.MeasureDescriptor(_rho(spec["rho"]), float(spec["t"]))


def _quad(spec) -> measure.QuadratureConfig:
    spec = spec or {}
    d = measure.DEFAULT_QUAD
    return measure.QuadratureConfig(spec.get("abs_tol", d.abs_tol), spec.get("max_subdivisions", d.max_subdivisions))


def _point(ctx, spec):
    if "real" in spec:
        return harmonic.RealPoint(float(spec["real"]))
    b = spec["bohr"]
    return harmonic.BohrPoint(_tuple(ctx, b["level"]), tuple(b["angles"]))


def _level_point(spec):
    if "circle" in spec:
        return projlim.CirclePart(float(spec["circle"]))
    return projlim.TorusPart(tuple(spec["torus"]))


def _cval(z: complex) -> dict:
    return {"re": z.real, "im": z.imag}


# --- commands ---------------------------------------------------------------
# Each handler returns (passed, result, diagnostics, csv_rows or None).

def _cmd_freq_indep(p, seed):
    ctx = _ctx(p)
    fs = [_freq(ctx, f) for f in p["freqs"]]
    return True, {"independent": frequency.is_z_independent(fs)}, {}, None


def _cmd_freq_join(p, seed):
    ctx = _ctx(p)
    L, Lp = _tuple(ctx, p["L"]), _tuple(ctx, p["Lp"])
    J = frequency.join(L, Lp)
    res = {
        "join": J.to_json(),
        "relation_L": frequency.solve_span(L, J).tolist(),
        "relation_Lp": frequency.solve_span(Lp, J).tolist(),
    }
    return True, res, {}, None


def _cmd_project(p, seed):
    ctx = _ctx(p)
    space = projlim.LevelSpace(_tuple(ctx, p["level"]))
    return True, {"point": projlim.project(_point(ctx, p["point"]), space).to_json()}, {}, None


def _cmd_transition(p, seed):
    ctx = _ctx(p)
    src = projlim.LevelSpace(_tuple(ctx, p["from_level"]))
    dst = projlim.LevelSpace(_tuple(ctx, p["to_level"]))
    pt = _level_point(p["point"])
    return True, {"point": projlim.transition(src, dst, pt).to_json()}, {}, None


def _cmd_verify_consistency(p, seed):
    ctx = _ctx(p)
    L, Lp = _tuple(ctx, p["L"]), _tuple(ctx, p["Lp"])
    rel = None
    if "relation" in p:
        rows = p["relation"]
        if len(rows) != len(L) or any(len(r) != len(Lp) for r in rows):
            raise InvalidJob(f"payload/relation: expected a {len(L)}x{len(Lp)} integer matrix")
        rel = frequency.IntegerRelationMatrix(tuple(tuple(r) for r in rows))
    rep = projlim.verify_pushforward_exact(L, Lp, p.get("max_exponent", 3), rel)
    return rep["status"] == "pass", rep, {}, None


def _cmd_integrate(p, seed):
    ctx = _ctx(p)
    v, err = measure.integrate_qf(_function(ctx, p["function"]), _measure(p["measure"]), _quad(p.get("quad")))
    return True, {"value": _cval(v), "est_error": err}, {}, None


def _cmd_inner_product(p, seed):
    ctx = _ctx(p)
    v, err = measure.inner_product(_function(ctx, p["f"]), _function(ctx, p["g"]),
                                   _measure(p["measure"]), _quad(p.get("quad")))
    return True, {"value": _cval(v), "est_error": err}, {}, None


def _cmd_isometry_check(p, seed):
    ctx = _ctx(p)
    psi = _function(ctx, p["function"])
    src, dst = _measure(p["from"]), _measure(p["to"])
    quad = _quad(p.get("quad"))
    phi = measure.isometry_transport(psi, src, dst)
    n1, n2 = measure.norm(psi, src, quad), measure.norm(phi, dst, quad)
    tol = p.get("tol", 1e-7)
    diff = abs(n1 - n2)
    return diff <= tol, {"norm_source": n1, "norm_target": n2, "abs_difference": diff,
                         "tolerance": tol, "passed": diff <= tol}, {}, None


def _cmd_jons_check(p, seed):
    ctx = _ctx(p)
    cand = p.get("candidate")
    rep = measure.jons_conditions_check(
        None if cand is None else _measure(cand),
        [_c0(c) for c in p.get("c0_family", [])],
        [harmonic.APPolynomial.from_json(ctx, a) for a in p["ap_family"]],
        probe_n=p.get("probe_n", 1.0),
        tol=p.get("tol", 1e-10),
        quad=_quad(p.get("quad")),
    )
    return rep.passed, rep.to_json(), {}, None


def _need(p, *keys):
    for k in keys:
        if k not in p:
            raise InvalidJob(f"payload: '{k}' is required for this holonomy kind")


def _cmd_holonomy(p, seed):
    cs = p.get("cs", [p["c"]] if "c" in p else None)
    if cs is None:
        raise InvalidJob("payload: one of 'c' or 'cs' is required")
    if p["kind"] == "linear":
        _need(p, "l", "v")
        vals = [su2.holonomy_linear(c, p["l"], p["v"]) for c in cs]
        rows = [[c] + [x for z in h.matrix().ravel() for x in (z.real, z.imag)] for c, h in zip(cs, vals)]
    else:
        _need(p, "tau", "r")
        params = su2.CircularCurveParams(p["tau"], p["r"], tuple(p.get("n", (0.0, 0.0, 1.0))))
        vals = [su2.holonomy_circular(c, params) for c in cs]
        rows = su2.holonomy_csv_rows(cs, params)
    res = {"holonomy": [dict(c=c, **h.to_json()) for c, h in zip(cs, vals)]}
    return True, res, {}, rows


def _cmd_circle_lemma(p, seed):
    grid = su2.CircleGrid(**p.get("grid", {}))
    rep = su2.circle_lemma_report(p["tau"], p["r"], p["epsilon"], grid, seed=seed)
    c_max = grid.c_max
    cs = np.linspace(-c_max, c_max, grid.points)
    rows = su2.holonomy_csv_rows(cs, su2.CircularCurveParams(p["tau"], p["r"]))
    return rep["passed"], rep, {}, rows


def _cmd_al_verify(p, seed):
    spec = almeasure.DecompositionSpec.from_json(p["spec"], validate=p.get("validate", True))
    rep = almeasure.verify_al_pushforward(spec, p.get("N", 100_000), seed, p.get("streams", 4))
    return rep["passed"], rep, {"statistics_count": len(rep["statistics"])}, None


HANDLERS: dict[str, Callable] = {
    "freq-indep": _cmd_freq_indep,
    "freq-join": _cmd_freq_join,
    "project": _cmd_project,
    "transition": _cmd_transition,
    "verify-consistency": _cmd_verify_consistency,
    "integrate": _cmd_integrate,
    "inner-product": _cmd_inner_product,
    "isometry-check": _cmd_isometry_check,
    "jons-check": _cmd_jons_check,
    "holonomy": _cmd_holonomy,
    "circle-lemma": _cmd_circle_lemma,
    "al-verify": _cmd_al_verify,
}

# errors raised by the library on bad but schema-valid input
_DOMAIN_ERRORS = (
    InvalidJob,
    frequency.ContextError,
    harmonic.FrequencyNotInLevel,
    projlim.OrderingError,
    measure.DomainError,
    almeasure.InvalidSpec,
    ValueError,
)


# --- serialization ----------------------------------------------------------

def _encode(obj: Any) -> str:
    """JSON with every float written to 17 significant digits."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return format(x, ".17g") if math.isfinite(x) else "null"
    if isinstance(obj, complex):
        return _encode(_cval(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k), ensure_ascii=False)}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    return _encode(obj) + "\n"


def run(job: dict, seed_override: int | None = None) -> tuple[int, dict, list | None]:
    """Execute one job; returns (exit code, result document, csv rows)."""
    try:
        _validate(job, JOB_SCHEMA, "job")
        command, payload = job["command"], job["payload"]
        _validate(payload, SCHEMAS[command], "payload")
    except InvalidJob as exc:
        doc = {"command": job.get("command") if isinstance(job, dict) else None,
               "inputs_echo": job, "result": None,
               "diagnostics": {"error": str(exc)}, "seed": seed_override}
        return EXIT_INVALID, doc, None
    seed = seed_override if seed_override is not None else payload.get("seed", job.get("seed", 0))
    doc = {"command": command, "inputs_echo": payload, "result": None, "diagnostics": {}, "seed": seed}
    try:
        passed, result, diag, rows = HANDLERS[command](payload, seed)
    except _DOMAIN_ERRORS as exc:
        doc["diagnostics"] = {"error": f"{type(exc).__name__}: {exc}"}
        return EXIT_INVALID, doc, None
    except measure.QuadratureError as exc:
        doc["diagnostics"] = {"error": str(exc), "estimate": exc.estimate, "est_error": exc.error}
        return EXIT_FAIL, doc, None
    doc["result"] = result
    doc["diagnostics"] = {"passed": passed, **diag}
    return (EXIT_OK if passed else EXIT_FAIL), doc, rows


def _csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["c", "re11", "im11", "re12", "im12", "re21", "im21", "re22", "im22"])
    for r in rows:
        w.writerow([format(float(x), ".17g") for x in r])
    return buf.getvalue()


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="rbar", description="Run one verification or integration job.")
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--job", type=Path, help="job file: {command, payload, seed?}")
    src.add_argument("--stdin", action="store_true", help="read the job from standard input")
    ap.add_argument("--seed", type=int, help="override the job's seed")
    ap.add_argument("--out", type=Path, help="write the JSON result here instead of stdout")
    ap.add_argument("--csv", action="store_true",
                    help="also write plot data (c, holonomy entries) next to --out with suffix .csv")
    args = ap.parse_args(argv)

    try:
        text = sys.stdin.read() if args.stdin else args.job.read_text()
        job = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"invalid job input: {exc}\n")
        return EXIT_INVALID
    if args.csv and args.out is None:
        sys.stderr.write("--csv needs --out to place the CSV file\n")
        return EXIT_INVALID

    code, doc, rows = run(job, args.seed)
    out = dumps(doc)
    if args.out is not None:
        args.out.write_text(out)
        if args.csv:
            if rows is None:
                sys.stderr.write(f"command {doc['command']!r} has no plot data; no CSV written\n")
            else:
                args.out.with_suffix(".csv").write_text(_csv_text(rows))
    else:
        sys.stdout.write(out)
    if code == EXIT_INVALID:
        sys.stderr.write(f"{doc['diagnostics'].get('error', 'invalid input')}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
