"""Command-line front end.

The CLI is a thin client of the service layer: it assembles the same request
models the HTTP endpoints take, dispatches them either in-process or to a
running server (--server URL), and writes the JSON/CSV artifacts.  Output is
deterministic for a fixed config and seed regardless of --threads.

Exit status: 0 on success, 2 on validation errors, 3 on numerical failure.
"""
from __future__ import annotations

import argparse
import io
import json
import sys

from pydantic import ValidationError

from .errors import ConfigInvalid, NoConvergence, SnwitnessError
from .service import handlers, models

_ENDPOINTS = {
    "fr": ("/fr", models.FrRequest, handlers.handle_fr),
    "verdict": ("/verdict", models.VerdictRequest, handlers.handle_verdict),
    "scan": ("/scan", models.ScanRequest, handlers.handle_scan),
    "threshold": ("/threshold", models.ThresholdRequest, handlers.handle_threshold),
    "oracle": ("/oracle", models.OracleRequest, handlers.handle_oracle),
    "schmidt": ("/schmidt", models.SchmidtRequest, handlers.handle_schmidt),
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file mirroring the run configuration; flags override it")
    p.add_argument("--server", help="base URL of a running service; default is in-process")
    p.add_argument("--out", help="output path; stdout if omitted")
    p.add_argument("--format", choices=["csv", "json"], dest="format")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, help="worker threads (0 = auto)")


def _add_operator_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--operator", choices=["matched", "flat_sinc", "projector", "identity", "file"])
    p.add_argument("--file", help="operator JSON (gamma or dense) when --operator file")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--db", type=float, help="squeezing in dB (mutually exclusive with --epsilon)")
    p.add_argument("--delta-phi-deg", type=float, dest="delta_phi_deg")
    p.add_argument("--cutoff", type=int)
    p.add_argument("--d", type=int, help="local dimension for the identity operator")
    p.add_argument("--r", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snwitness",
        description="Schmidt-number witness computations: f_r values, verdicts, "
                    "margin scans, thresholds, and the r-SE oracle.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fr", help="maximal SN-r expectation value of an operator")
    _add_operator_flags(p)
    p.add_argument("--enumeration-cap", type=int, dest="enumeration_cap")
    p.add_argument("--restarts", type=int)
    p.add_argument("--max-iters", type=int, dest="max_iters")
    _add_common(p)

    p = sub.add_parser("verdict", help="witness report for an operator and expectation")
    _add_operator_flags(p)
    p.add_argument("--expectation", type=float,
                   help="measured expectation; defaults to the scenario state's value")
    p.add_argument("--detection-tol", type=float, dest="detection_tol")
    _add_common(p)

    p = sub.add_parser("scan", help="margin curve over a grid of angles (CSV)")
    _add_operator_flags(p)
    p.add_argument("--angle-min-deg", type=float, dest="angle_min_deg")
    p.add_argument("--angle-max-deg", type=float, dest="angle_max_deg")
    p.add_argument("--angle-step-deg", type=float, dest="angle_step_deg")
    _add_common(p)

    p = sub.add_parser("threshold", help="detection threshold angle for a scenario")
    _add_operator_flags(p)
    p.add_argument("--coarse-step-deg", type=float, dest="coarse_step_deg")
    p.add_argument("--refine-tol-deg", type=float, dest="refine_tol_deg")
    _add_common(p)

    p = sub.add_parser("oracle", help="multi-start r-SE solver on a dense/gamma operator")
    _add_operator_flags(p)
    p.add_argument("--restarts", type=int)
    p.add_argument("--max-iters", type=int, dest="max_iters")
    _add_common(p)

    p = sub.add_parser("schmidt", help="Schmidt decomposition of a state file")
    p.add_argument("--file", help="pure-state JSON file")
    p.add_argument("--rank-tol", type=float, dest="rank_tol")
    _add_common(p)

    p = sub.add_parser("run", help="execute the command named in a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--server")
    p.add_argument("--out")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


def _merge_config(args: argparse.Namespace) -> models.RunConfig:
    """Builtin defaults < config file < explicit CLI flags."""
    merged: dict = {}
    path = getattr(args, "config", None)
    if path:
        try:
            with open(path) as fh:
                merged.update(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"config: cannot read {path}: {exc}") from exc
    for key, value in vars(args).items():
        if key in ("config", "command") or value is None:
            continue
        merged[key] = value
    if args.command != "run":
        merged["command"] = args.command
    elif "command" not in merged:
        raise ConfigInvalid("command: the config file for 'run' must name a command")
    # The margin curve's native format is CSV; everything else defaults to JSON.
    if merged.get("command") == "scan":
        merged.setdefault("format", "csv")
    try:
        return models.RunConfig(**merged)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first["loc"]) or "config"
        raise ConfigInvalid(f"{loc}: {first['msg']}") from exc


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"file: cannot read {path}: {exc}") from exc


def _operator_spec(cfg: models.RunConfig) -> models.OperatorSpec:
    if cfg.operator is None:
        raise ConfigInvalid("operator: required for this command")
    common = dict(epsilon=cfg.epsilon, db=cfg.db, delta_phi_deg=cfg.delta_phi_deg,
                  cutoff=cfg.cutoff, d=cfg.d)
    try:
        if cfg.operator == "file":
            if cfg.file is None:
                raise ConfigInvalid("file: required when operator is 'file'")
            data = _load_json(cfg.file)
            if {"n", "re", "im"} <= set(data):
                return models.OperatorSpec(kind="gamma", gamma=models.GammaMatrixModel(**data))
            if {"d_a", "d_b", "re", "im"} <= set(data):
                if len(data["re"]) == data["d_a"] * data["d_b"]:
                    return models.OperatorSpec(kind="dense", dense=models.DenseMatrixModel(**data))
                raise ConfigInvalid(
                    f"file: {cfg.file} holds a state, not an operator (matrix is d_a x d_b)"
                )
            raise ConfigInvalid(f"file: {cfg.file} is neither a gamma nor a dense operator")
        return models.OperatorSpec(kind=cfg.operator, **common)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first["loc"]) or "operator"
        raise ConfigInvalid(f"operator.{loc}: {first['msg']}") from exc


def _scenario_model(cfg: models.RunConfig) -> models.ScenarioModel:
    kind = cfg.operator or "matched"
    if kind not in ("matched", "flat_sinc"):
        raise ConfigInvalid(f"operator: scenario commands need 'matched' or 'flat_sinc', got {kind!r}")
    try:
        return models.ScenarioModel(epsilon=cfg.epsilon, db=cfg.db, cutoff=cfg.cutoff,
                                    operator_kind=kind, r=cfg.r)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first["loc"]) or "scenario"
        raise ConfigInvalid(f"scenario.{loc}: {first['msg']}") from exc


def _build_request(cfg: models.RunConfig):
    try:
        if cfg.command == "fr":
            return models.FrRequest(operator=_operator_spec(cfg), r=cfg.r,
                                    enumeration_cap=cfg.enumeration_cap, restarts=cfg.restarts,
                                    max_iters=cfg.max_iters, seed=cfg.seed, threads=cfg.threads)
        if cfg.command == "verdict":
            return models.VerdictRequest(operator=_operator_spec(cfg), r=cfg.r,
                                         expectation=cfg.expectation,
                                         detection_tol=cfg.detection_tol)
        if cfg.command == "scan":
            return models.ScanRequest(scenario=_scenario_model(cfg),
                                      angle_min_deg=cfg.angle_min_deg,
                                      angle_max_deg=cfg.angle_max_deg,
                                      angle_step_deg=cfg.angle_step_deg)
        if cfg.command == "threshold":
            return models.ThresholdRequest(scenario=_scenario_model(cfg), r=cfg.r,
                                           coarse_step_deg=cfg.coarse_step_deg,
                                           refine_tol_deg=cfg.refine_tol_deg)
        if cfg.command == "oracle":
            return models.OracleRequest(operator=_operator_spec(cfg), r=cfg.r,
                                        restarts=cfg.restarts, max_iters=cfg.max_iters,
                                        seed=cfg.seed, threads=cfg.threads)
        if cfg.command == "schmidt":
            if cfg.file is None:
                raise ConfigInvalid("file: required for the schmidt command")
            state = models.PureStateModel(**_load_json(cfg.file))
            return models.SchmidtRequest(state=state, rank_tol=cfg.rank_tol)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first["loc"]) or "request"
        raise ConfigInvalid(f"{loc}: {first['msg']}") from exc
    raise ConfigInvalid(f"command: unknown command {cfg.command!r}")


def _dispatch(cfg: models.RunConfig, request) -> dict:
    path, _, handler = _ENDPOINTS[cfg.command]
    if cfg.server:
        import httpx

        resp = httpx.post(cfg.server.rstrip("/") + path,
                          json=request.model_dump(mode="json"), timeout=600.0)
        if resp.status_code != 200:
            detail = resp.json() if "json" in resp.headers.get("content-type", "") else resp.text
            raise ConfigInvalid(f"server: {resp.status_code}: {detail}")
        return resp.json()
    return handler(request).model_dump(mode="json")


def _render(cfg: models.RunConfig, payload: dict) -> str:
    if cfg.command == "scan" and cfg.format == "csv":
        buf = io.StringIO()
        buf.write("delta_phi_deg,expectation,f_r,margin\n")
        rows = zip(payload["delta_phi_deg"], payload["expectation"],
                   payload["f_r"], payload["margin"])
        for a, e, f, m in rows:
            buf.write(f"{a:.12g},{e:.12g},{f:.12g},{m:.12g}\n")
        return buf.getvalue()
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _emit(cfg: models.RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service.app import app

        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    try:
        cfg = _merge_config(args)
        request = _build_request(cfg)
        payload = _dispatch(cfg, request)
        _emit(cfg, _render(cfg, payload))
        return 0
    except NoConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConfigInvalid, SnwitnessError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
