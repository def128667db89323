"""Batch command-line client.

Every subcommand is an HTTP call against the service API. By default the
service runs in-process (no socket, no daemon), so the CLI behaves like a
plain local tool; ``--server URL`` points the same calls at a remote
instance instead.

Option precedence: command-line flags override ``--config`` file values,
which override built-in defaults. Exit codes: 0 success, 1 invalid input
or usage, 2 runtime or numeric failure.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import os
import sys

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - py310 fallback
    import tomli as tomllib

import httpx

from .evaluation import AblationReport, EvalReport

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2


class _Parser(argparse.ArgumentParser):
    # usage problems are validation errors, so exit 1 rather than argparse's 2
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(self._fail(message))

    def _fail(self, message) -> int:
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        return EXIT_INVALID


def _post(server: str | None, path: str, payload: dict) -> tuple[int, dict]:
    """POST to a remote server, or to the in-process app when none is given."""
    if server is None:
        from .service import create_app

        async def go():
            transport = httpx.ASGITransport(app=create_app())
            async with httpx.AsyncClient(
                transport=transport, base_url="http://nextround.internal", timeout=None
            ) as client:
                r = await client.post(path, json=payload)
                return r.status_code, r.json()

        return asyncio.run(go())
    with httpx.Client(base_url=server, timeout=None) as client:
        r = client.post(path, json=payload)
        return r.status_code, r.json()


def _config_file_values(path: str, known: set[str]) -> dict:
    try:
        with open(path, "rb") as f:
            doc = tomllib.load(f)
    except OSError as exc:
        raise SystemExit(_error(f"cannot read config file: {exc}", EXIT_INVALID))
    except tomllib.TOMLDecodeError as exc:
        raise SystemExit(_error(f"bad config file {path}: {exc}", EXIT_INVALID))
    unknown = set(doc) - known
    if unknown:
        raise SystemExit(
            _error(f"unknown config key(s) in {path}: {', '.join(sorted(unknown))}", EXIT_INVALID)
        )
    return doc


def _error(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _merge_options(args: argparse.Namespace, option_names: list[str]) -> dict:
    """Flags beat config-file values; unset options fall through to defaults."""
    values = {}
    if getattr(args, "config", None):
        values.update(_config_file_values(args.config, set(option_names)))
    for name in option_names:
        given = getattr(args, name, None)
        if given is not None:
            values[name] = given
    return values


def _write_report(out_dir: str, name: str, doc: dict) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w") as f:
        json.dump(doc, f, indent=1, sort_keys=True)
        f.write("\n")
    return path


def _corpus_payload(values: dict) -> dict:
    payload = {
        "landmarks_path": values.get("landmarks"),
        "metadata_path": values.get("metadata"),
        "scores_path": values.get("scores"),
        "labels_path": values.get("labels"),
    }
    if not payload["landmarks_path"] or not payload["metadata_path"]:
        raise SystemExit(_error("--landmarks and --metadata are required", EXIT_INVALID))
    return payload


_TRAIN_OPTION_KEYS = {
    "seed": "seed",
    "mode": "mode",
    "epochs": "epochs",
    "lr": "learning_rate",
    "dropout": "dropout_rate",
    "optimizer": "optimizer",
    "batch_size": "batch_size",
    "patience": "early_stop_patience",
    "head_activation": "head_activation",
}


def _train_options(values: dict) -> dict:
    return {wire: values[flag] for flag, wire in _TRAIN_OPTION_KEYS.items() if flag in values}


def _add_corpus_flags(p: argparse.ArgumentParser):
    p.add_argument("--landmarks", help="landmark series CSV")
    p.add_argument("--metadata", help="golfer metadata CSV")
    p.add_argument("--scores", help="round scores CSV (labels derived from rank ratios)")
    p.add_argument("--labels", help="explicit labels CSV (alternative to --scores)")


def _add_train_flags(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, help="seed for init, shuffling, dropout, and splits")
    p.add_argument("--mode", choices=["merged", "facial_only", "meta_only"])
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float, help="learning rate")
    p.add_argument("--dropout", type=float, help="dropout rate")
    p.add_argument("--optimizer", choices=["adam", "sgd"])
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--patience", type=int, help="early-stop patience in epochs")
    p.add_argument("--head-activation", choices=["identity", "relu"], dest="head_activation")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nextround", description=__doc__.split("\n\n")[0])
    parser.add_argument("--server", help="base URL of a running service; default is in-process")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a corpus and write a dataset bundle")
    _add_corpus_flags(p)
    p.add_argument("--out", help="output directory for the dataset bundle JSON")
    p.add_argument("--config", help="TOML file with flag defaults")

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--out", help="output directory for the corpus CSVs")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-samples", type=int, dest="n_samples")
    p.add_argument("--class-balance", type=float, dest="class_balance")
    p.add_argument("--frames", type=int)
    p.add_argument("--p-face", type=float, dest="p_face")
    p.add_argument("--p-meta", type=float, dest="p_meta")
    p.add_argument("--noise-sigma", type=float, dest="noise_sigma")
    p.add_argument("--nationality-pool", type=int, dest="nationality_pool")
    p.add_argument("--config", help="TOML file with flag defaults")

    p = sub.add_parser("train", help="train a model and save a checkpoint")
    _add_corpus_flags(p)
    _add_train_flags(p)
    p.add_argument("--out", help="output directory for checkpoint and report")
    p.add_argument("--config", help="TOML file with flag defaults")

    p = sub.add_parser("eval", help="evaluate a checkpoint on a labeled corpus")
    _add_corpus_flags(p)
    p.add_argument("--checkpoint", help="checkpoint JSON emitted by train")
    p.add_argument("--out", help="output directory for the evaluation report")
    p.add_argument("--config", help="TOML file with flag defaults")

    p = sub.add_parser("ablate", help="train all three modes on one split and compare")
    _add_corpus_flags(p)
    _add_train_flags(p)
    p.add_argument("--test-fraction", type=float, dest="test_fraction")
    p.add_argument("--out", help="output directory for the ablation report")
    p.add_argument("--config", help="TOML file with flag defaults")

    p = sub.add_parser("gradcheck", help="finite-difference check of the analytic gradients")
    p.add_argument("--seed", type=int, help="base seed for the checked configurations")
    p.add_argument("--n-configs", type=int, dest="n_configs")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--out", help="output directory for the gradcheck report")
    p.add_argument("--config", help="TOML file with flag defaults")

    return parser


_SUBCOMMAND_OPTIONS = {
    "ingest": ["landmarks", "metadata", "scores", "labels", "out"],
    "synth": [
        "out", "seed", "n_samples", "class_balance", "frames",
        "p_face", "p_meta", "noise_sigma", "nationality_pool",
    ],
    "train": ["landmarks", "metadata", "scores", "labels", "out", *_TRAIN_OPTION_KEYS],
    "eval": ["landmarks", "metadata", "scores", "labels", "checkpoint", "out"],
    "ablate": ["landmarks", "metadata", "scores", "labels", "test_fraction", "out", *_TRAIN_OPTION_KEYS],
    "gradcheck": ["seed", "n_configs", "tolerance", "out"],
}


def _dispatch(args: argparse.Namespace) -> int:
    values = _merge_options(args, _SUBCOMMAND_OPTIONS[args.command])
    server = args.server

    if args.command == "ingest":
        payload = _corpus_payload(values)
        out = values.get("out")
        if out:
            os.makedirs(out, exist_ok=True)
            payload["bundle_path"] = os.path.join(out, "dataset.json")
        status, body = _post(server, "/ingest", payload)
        if status != 200:
            return _http_failure(status, body)
        counts = body["class_counts"]
        frames = body["frames"]
        print(f"videos: {body['n_videos']}  golfers: {body['n_golfers']}")
        print(f"class counts: down_or_flat={counts['down_or_flat']} up={counts['up']}")
        print(
            f"frames per video: min {frames['min']} max {frames['max']} "
            f"mean {frames['mean']:.1f}  truncated: {body['n_truncated']}"
        )
        if body.get("bundle_path"):
            print(f"bundle: {body['bundle_path']}")
        return EXIT_OK

    if args.command == "synth":
        out = values.pop("out", None)
        if not out:
            return _error("--out is required", EXIT_INVALID)
        status, body = _post(server, "/synth", {"out_dir": out, "spec": values})
        if status != 200:
            return _http_failure(status, body)
        paths = body["paths"]
        print(f"wrote synthetic corpus of {body['spec']['n_samples']} videos to {paths['out_dir']}")
        for key in ("landmarks_path", "metadata_path", "scores_path", "manifest_path"):
            print(f"  {paths[key]}")
        return EXIT_OK

    if args.command == "train":
        payload = _corpus_payload(values)
        out = values.get("out")
        if not out:
            return _error("--out is required", EXIT_INVALID)
        os.makedirs(out, exist_ok=True)
        payload["checkpoint_path"] = os.path.join(out, "model.json")
        payload["config"] = _train_options(values)
        status, body = _post(server, "/train", payload)
        if status != 200:
            return _http_failure(status, body)
        report_path = _write_report(out, "train_report.json", body)
        rep = body["report"]
        final = EvalReport.from_dict(body["final_eval"])
        print(
            f"trained {body['mode']} on {body['n_train']} videos "
            f"(val {body['n_val']}); best epoch {rep['best_epoch']} "
            f"of {rep['epochs_run']} run"
        )
        print(f"corpus positive F1 {final.positive_f1:.4f}")
        print(f"checkpoint: {payload['checkpoint_path']}")
        print(f"report: {report_path}")
        return EXIT_OK

    if args.command == "eval":
        payload = _corpus_payload(values)
        if not values.get("checkpoint"):
            return _error("--checkpoint is required", EXIT_INVALID)
        payload["checkpoint_path"] = values["checkpoint"]
        status, body = _post(server, "/eval", payload)
        if status != 200:
            return _http_failure(status, body)
        report = EvalReport.from_dict(body["report"])
        print(f"evaluated {body['mode']} on {body['n_samples']} videos")
        print(report.render_table())
        if values.get("out"):
            print(f"report: {_write_report(values['out'], 'eval_report.json', body)}")
        return EXIT_OK

    if args.command == "ablate":
        payload = _corpus_payload(values)
        payload["config"] = _train_options(values)
        if "test_fraction" in values:
            payload["test_fraction"] = values["test_fraction"]
        status, body = _post(server, "/ablate", payload)
        if status != 200:
            return _http_failure(status, body)
        report = AblationReport(
            merged=EvalReport.from_dict(body["merged"]),
            facial_only=EvalReport.from_dict(body["facial_only"]),
            meta_only=EvalReport.from_dict(body["meta_only"]),
            n_train=body["n_train"],
            n_test=body["n_test"],
        )
        print(f"ablation over {body['n_train']} train / {body['n_test']} test videos")
        print(report.render_table())
        if values.get("out"):
            print(f"report: {_write_report(values['out'], 'ablation_report.json', body)}")
        return EXIT_OK

    if args.command == "gradcheck":
        payload = {}
        if "seed" in values:
            payload["base_seed"] = values["seed"]
        for key in ("n_configs", "tolerance"):
            if key in values:
                payload[key] = values[key]
        status, body = _post(server, "/gradcheck", payload)
        if status != 200:
            return _http_failure(status, body)
        verdict = "PASS" if body["all_passed"] else "FAIL"
        print(
            f"max relative error {body['max_rel_error']:.3e} over "
            f"{len(body['reports'])} configurations "
            f"(tolerance {body['tolerance']:.0e}): {verdict}"
        )
        if values.get("out"):
            print(f"report: {_write_report(values['out'], 'gradcheck_report.json', body)}")
        return EXIT_OK if body["all_passed"] else EXIT_RUNTIME

    raise AssertionError(f"unhandled command {args.command!r}")


def _http_failure(status: int, body: dict) -> int:
    detail = body.get("detail", body)
    if status in (400, 422):
        return _error(f"invalid input: {detail}", EXIT_INVALID)
    return _error(f"server failure (HTTP {status}): {detail}", EXIT_RUNTIME)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except SystemExit:
        raise
    except httpx.HTTPError as exc:
        return _error(f"cannot reach server: {exc}", EXIT_RUNTIME)


if __name__ == "__main__":
    sys.exit(main())
