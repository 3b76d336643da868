"""Command line entry point.

Subcommands:
  bridge          run the host daemon (optionally with gateway and inline mock)
  guest           run the guest-side console against a share directory
  mock            run the mock inference server standalone
  check-protocol  validate a share directory's files against the wire format
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import signal
import sys
import threading
from dataclasses import replace
from pathlib import Path

from . import config as config_mod
from . import exchange, gateway, guest, mockserver
from .codec import decode_bytes
from .config import BridgeConfig, ConfigError
from .history import ChatHistory

log = logging.getLogger("macbridge")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--share-dir", dest="share_dir", help="shared folder used as the message transport")
    p.add_argument("--server-url", dest="server_url", help="inference endpoint base URL")
    p.add_argument("--model", dest="model", help="model id sent in requests")
    p.add_argument("--temperature", dest="temperature", type=float)
    p.add_argument("--max-tokens", dest="max_tokens", type=int)
    p.add_argument("--history-rounds", dest="history_rounds", type=int)
    p.add_argument("--max-line-bytes", dest="max_line_bytes", type=int)
    p.add_argument("--poll-ms", dest="poll_ms", type=float, help="host poll interval in milliseconds")
    p.add_argument("--attempts", dest="attempts", type=int, help="guest re-read attempts before dozing")
    p.add_argument("--doze-message", dest="doze_message")
    p.add_argument("--priming", dest="priming", help="priming fixture (JSON list of messages)")
    p.add_argument("--transcript", dest="transcript", help="transcript JSONL path")
    p.add_argument("--gateway-port", dest="gateway_port", type=int)
    p.add_argument("--config", dest="config", help="JSON config file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="macbridge", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_bridge = sub.add_parser("bridge", help="run the host daemon loop")
    _add_config_flags(p_bridge)
    p_bridge.add_argument("--mock-inline", action="store_true",
                          help="serve an in-process mock backend instead of a real endpoint")
    p_bridge.add_argument("--mock-script", dest="mock_script",
                          help="JSON list of replies for the inline mock (default: echo mode)")
    p_bridge.add_argument("--max-turns", dest="max_turns", type=int,
                          help="exit after this many turns (for demos and CI)")

    p_guest = sub.add_parser("guest", help="run the guest console")
    _add_config_flags(p_guest)

    p_mock = sub.add_parser("mock", help="run the mock inference server")
    p_mock.add_argument("--port", type=int, default=8000)
    p_mock.add_argument("--mode", choices=["scripted", "echo", "overlong", "delayed", "fail"],
                        default="echo")
    p_mock.add_argument("--script", help="JSON list of replies (scripted mode)")
    p_mock.add_argument("--multiplier", type=int, default=5)
    p_mock.add_argument("--delay", type=float, default=2.0)
    p_mock.add_argument("--status", type=int, default=500)

    p_check = sub.add_parser("check-protocol", help="validate share directory files")
    p_check.add_argument("--share-dir", dest="share_dir", required=True)
    p_check.add_argument("--max-line-bytes", dest="max_line_bytes", type=int, default=253)

    return parser


def _load_bridge_config(args: argparse.Namespace) -> BridgeConfig:
    return config_mod.load_config(flags=vars(args), env=os.environ, config_path=args.config)


def _install_stop_handler(stop: threading.Event) -> None:
    def handler(signum, frame):
        log.info("shutdown signal received")
        stop.set()

    for sig in (signal.SIGINT, signal.SIGTERM):
        try:
            signal.signal(sig, handler)
        except ValueError:
            pass  # not the main thread (tests); caller drives the stop event


def cmd_bridge(args: argparse.Namespace) -> int:
    cfg = _load_bridge_config(args)
    cfg.share.dir.mkdir(parents=True, exist_ok=True)

    priming_path = cfg.priming_path or config_mod.default_priming_path()
    priming = config_mod.load_priming(priming_path)
    history = ChatHistory.new(priming, window_rounds=cfg.history_window)

    stop = threading.Event()
    _install_stop_handler(stop)

    mock = None
    gen_cfg = cfg.gen
    if args.mock_inline:
        if args.mock_script:
            replies = json.loads(Path(args.mock_script).read_text(encoding="utf-8"))
            script = mockserver.MockScript.scripted(replies)
        else:
            script = mockserver.MockScript.echo()
        mock = mockserver.serve(script)
        gen_cfg = replace(cfg.gen, endpoint_url=mock.url)
        log.info("inline mock backend at %s", mock.url)

    gw = None
    if cfg.gateway_port is not None:
        state = gateway.GatewayState(
            paths=cfg.share,
            guest_policy=cfg.guest,
            chunk_policy=cfg.chunk,
            static_dir=cfg.ui_dir,
        )
        gw = gateway.serve_gateway(state, ("127.0.0.1", cfg.gateway_port))
        log.info("gateway listening at %s", gw.url)

    log.info("bridge loop starting on %s", cfg.share.dir)
    try:
        with exchange.TranscriptWriter(cfg.transcript_path) as transcript:
            exchange.run_loop(
                cfg.share,
                cfg.poll,
                history,
                gen_cfg,
                cfg.chunk,
                transcript,
                failure_line=cfg.failure_message,
                stop=stop,
                max_turns=args.max_turns,
            )
    finally:
        if gw is not None:
            gw.close()
        if mock is not None:
            mock.close()
    log.info("bridge loop stopped; transcript flushed to %s", cfg.transcript_path)
    return 0


def cmd_guest(args: argparse.Namespace) -> int:
    cfg = _load_bridge_config(args)
    cfg.share.dir.mkdir(parents=True, exist_ok=True)
    guest.run_console(cfg.share, cfg.guest)
    return 0


def cmd_mock(args: argparse.Namespace) -> int:
    if args.mode == "scripted":
        if not args.script:
            print("scripted mode needs --script FILE", file=sys.stderr)
            return 2
        replies = json.loads(Path(args.script).read_text(encoding="utf-8"))
        script = mockserver.MockScript.scripted(replies)
    elif args.mode == "echo":
        script = mockserver.MockScript.echo()
    elif args.mode == "overlong":
        script = mockserver.MockScript.overlong(args.multiplier)
    elif args.mode == "delayed":
        script = mockserver.MockScript.delayed(args.delay)
    else:
        script = mockserver.MockScript.fail(args.status)

    server = mockserver.MockServer(script, ("127.0.0.1", args.port))
    print(f"mock inference server ({args.mode}) at {server.url}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def _check_file(label: str, data: bytes, *, is_output: bool, max_line_bytes: int) -> list[str]:
    problems = []
    if not data:
        return problems
    if is_output:
        if not data.endswith(b"\r"):
            problems.append(f"{label}: not CR-terminated")
        segments = data.split(b"\r")[:-1] if data.endswith(b"\r") else data.split(b"\r")
        for i, seg in enumerate(segments):
            if not seg:
                problems.append(f"{label}: line {i + 1} is empty")
            if len(seg) > max_line_bytes:
                problems.append(f"{label}: line {i + 1} is {len(seg)} bytes (max {max_line_bytes})")
            if b"\n" in seg:
                problems.append(f"{label}: line {i + 1} contains a stray LF byte")
    else:
        body = data[:-1] if data.endswith(b"\r") else data
        if b"\r" in body or b"\n" in body:
            problems.append(f"{label}: more than one line (embedded separator)")
    return problems


def cmd_check_protocol(args: argparse.Namespace) -> int:
    share = exchange.SharePaths(dir=Path(args.share_dir))
    problems: list[str] = []
    for label, path, is_output in (
        ("input", share.input_path, False),
        ("output", share.output_path, True),
    ):
        try:
            data = path.read_bytes()
        except FileNotFoundError:
            print(f"{label}: absent (ok, means no message)")
            continue
        file_problems = _check_file(label, data, is_output=is_output,
                                    max_line_bytes=args.max_line_bytes)
        problems.extend(file_problems)
        if not file_problems:
            state = "empty (ok, means no message)" if not data else \
                f"{len(data)} bytes, ok: {decode_bytes(data)[:60]!r}"
            print(f"{label}: {state}")
    for p in problems:
        print(f"PROBLEM {p}")
    return 1 if problems else 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("BRIDGE_LOG", "INFO"),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "bridge":
            return cmd_bridge(args)
        if args.command == "guest":
            return cmd_guest(args)
        if args.command == "mock":
            return cmd_mock(args)
        if args.command == "check-protocol":
            return cmd_check_protocol(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (config_mod.ParseError, config_mod.InvalidRole) as exc:
        print(f"priming error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"fatal IO error: {exc}", file=sys.stderr)
        return 1
    parser.error(f"unknown command {args.command!r}")
    return 2
