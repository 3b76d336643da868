"""Bridge configuration: flags over environment over config file over defaults.

The config file is a single JSON document with nested sections mirroring
:class:`BridgeConfig` (see docs/protocol.md for the full schema). Only two
settings come from the environment: BRIDGE_SERVER_URL and BRIDGE_API_KEY.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from .chunker import ChunkPolicy
from .client import GenerationConfig
from .exchange import DEFAULT_FAILURE_LINE, PollPolicy, SharePaths
from .guest import GuestPolicy
from .history import ROLES, ChatMessage

__all__ = [
    "BridgeConfig",
    "ConfigError",
    "InvalidRole",
    "ParseError",
    "default_priming_path",
    "load_config",
    "load_priming",
]


class ConfigError(ValueError):
    def __init__(self, field: str, reason: str, source: str = "defaults"):
        self.field = field
        self.reason = reason
        self.source = source
        super().__init__(f"{field}: {reason} (from {source})")


class ParseError(ValueError):
    """Priming fixture is not valid JSON or not a list of messages."""


class InvalidRole(ValueError):
    def __init__(self, role: object, index: int):
        self.role = role
        self.index = index
        super().__init__(f"message {index}: role must be one of {ROLES}, got {role!r}")


@dataclass(frozen=True)
class BridgeConfig:
    share: SharePaths
    poll: PollPolicy
    guest: GuestPolicy
    gen: GenerationConfig
    chunk: ChunkPolicy
    history_window: int = 10
    priming_path: Path | None = None
    transcript_path: Path = Path("transcript.jsonl")
    gateway_port: int | None = None
    failure_message: str = DEFAULT_FAILURE_LINE
    ui_dir: Path | None = None

    def __post_init__(self):
        if self.history_window < 1:
            raise ValueError("history_window must be >= 1")


# leaf -> (flag name, env var, path into the config file document, default)
_SETTINGS: dict[str, tuple[str | None, str | None, tuple[str, ...], Any]] = {
    "share.dir": ("share_dir", None, ("share", "dir"), "share"),
    "share.input_name": (None, None, ("share", "input_name"), "input.txt"),
    "share.output_name": (None, None, ("share", "output_name"), "output.txt"),
    "poll.interval_ms": ("poll_ms", None, ("poll", "interval_ms"), 250),
    "poll.stability_reads": (None, None, ("poll", "stability_reads"), 2),
    "guest.max_read_attempts": ("attempts", None, ("guest", "max_read_attempts"), 10),
    "guest.attempt_interval_ms": (None, None, ("guest", "attempt_interval_ms"), 500),
    "guest.doze_message": ("doze_message", None, ("guest", "doze_message"), "Robot dozed off..."),
    "guest.max_input_chars": (None, None, ("guest", "max_input_chars"), 253),
    "gen.endpoint_url": ("server_url", "BRIDGE_SERVER_URL", ("gen", "endpoint_url"), "http://127.0.0.1:8000/v1"),
    "gen.model_id": ("model", None, ("gen", "model_id"), "Llama-2-13b-chat"),
    "gen.temperature": ("temperature", None, ("gen", "temperature"), 0.8),
    "gen.max_tokens": ("max_tokens", None, ("gen", "max_tokens"), 60),
    "gen.request_timeout_s": (None, None, ("gen", "request_timeout_s"), 30.0),
    "gen.api_key": (None, "BRIDGE_API_KEY", ("gen", "api_key"), None),
    "chunk.max_line_bytes": ("max_line_bytes", None, ("chunk", "max_line_bytes"), 253),
    "chunk.empty_reply_fallback": (None, None, ("chunk", "empty_reply_fallback"), "..."),
    "history_window": ("history_rounds", None, ("history_window",), 10),
    "priming_path": ("priming", None, ("priming_path",), None),
    "transcript_path": ("transcript", None, ("transcript_path",), "transcript.jsonl"),
    "gateway_port": ("gateway_port", None, ("gateway_port",), None),
    "failure_message": (None, None, ("failure_message",), DEFAULT_FAILURE_LINE),
    "ui_dir": (None, None, ("ui_dir",), None),
}


def _dig(doc: Mapping | None, path: tuple[str, ...]):
    node: Any = doc
    for key in path:
        if not isinstance(node, Mapping) or key not in node:
            return None
        node = node[key]
    return node


def _resolve(
    flags: Mapping[str, Any],
    env: Mapping[str, str],
    file_doc: Mapping | None,
) -> tuple[dict[str, Any], dict[str, str]]:
    values: dict[str, Any] = {}
    sources: dict[str, str] = {}
    for leaf, (flag, env_var, file_path, default) in _SETTINGS.items():
        if flag is not None and flags.get(flag) is not None:
            values[leaf], sources[leaf] = flags[flag], f"flag --{flag.replace('_', '-')}"
        elif env_var is not None and env.get(env_var):
            values[leaf], sources[leaf] = env[env_var], f"env {env_var}"
        elif (found := _dig(file_doc, file_path)) is not None:
            values[leaf], sources[leaf] = found, f"config file {'.'.join(file_path)}"
        else:
            values[leaf], sources[leaf] = default, "defaults"
    return values, sources


def _build(section: str, ctor, kwargs: dict, sources: dict[str, str]):
    try:
        return ctor(**kwargs)
    except (TypeError, ValueError) as exc:
        reason = str(exc)
        named = [leaf for leaf in sources if leaf.split(".")[-1] in reason]
        scoped = [leaf for leaf in named if leaf.startswith(section)]
        leaf = (scoped or named or [section])[0]
        raise ConfigError(leaf, reason, sources.get(leaf, "defaults")) from exc


def _number(values: dict, sources: dict, leaf: str, kind=float):
    raw = values[leaf]
    if raw is None:
        return None
    try:
        return kind(raw)
    except (TypeError, ValueError):
        raise ConfigError(leaf, f"expected a number, got {raw!r}", sources[leaf]) from None


def load_config(
    flags: Mapping[str, Any] | None = None,
    env: Mapping[str, str] | None = None,
    config_path: Path | str | None = None,
) -> BridgeConfig:
    """Merge all sources into a validated BridgeConfig."""
    flags = dict(flags or {})
    env = dict(env or {})
    file_doc = None
    if config_path is not None:
        try:
            file_doc = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError("config", f"cannot read {config_path}: {exc}", "flag --config") from exc
        except ValueError as exc:
            raise ConfigError("config", f"{config_path} is not valid JSON: {exc}", "flag --config") from exc
        if not isinstance(file_doc, dict):
            raise ConfigError("config", f"{config_path} must hold a JSON object", "flag --config")

    values, sources = _resolve(flags, env, file_doc)

    share = _build("share", SharePaths, {
        "dir": Path(values["share.dir"]),
        "input_name": str(values["share.input_name"]),
        "output_name": str(values["share.output_name"]),
    }, sources)
    poll = _build("poll", PollPolicy, {
        "interval": _number(values, sources, "poll.interval_ms") / 1000.0,
        "stability_reads": _number(values, sources, "poll.stability_reads", int),
    }, sources)
    guest = _build("guest", GuestPolicy, {
        "max_read_attempts": _number(values, sources, "guest.max_read_attempts", int),
        "attempt_interval": _number(values, sources, "guest.attempt_interval_ms") / 1000.0,
        "doze_message": str(values["guest.doze_message"]),
        "max_input_chars": _number(values, sources, "guest.max_input_chars", int),
    }, sources)
    gen = _build("gen", GenerationConfig, {
        "endpoint_url": str(values["gen.endpoint_url"]),
        "model_id": str(values["gen.model_id"]),
        "temperature": _number(values, sources, "gen.temperature"),
        "max_tokens": _number(values, sources, "gen.max_tokens", int),
        "request_timeout": _number(values, sources, "gen.request_timeout_s"),
        "api_key": values["gen.api_key"] and str(values["gen.api_key"]),
    }, sources)
    chunk = _build("chunk", ChunkPolicy, {
        "max_line_bytes": _number(values, sources, "chunk.max_line_bytes", int),
        "empty_reply_fallback": str(values["chunk.empty_reply_fallback"]),
    }, sources)

    gateway_port = _number(values, sources, "gateway_port", int)
    return _build("bridge", BridgeConfig, {
        "share": share,
        "poll": poll,
        "guest": guest,
        "gen": gen,
        "chunk": chunk,
        "history_window": _number(values, sources, "history_window", int),
        "priming_path": Path(values["priming_path"]) if values["priming_path"] else None,
        "transcript_path": Path(values["transcript_path"]),
        "gateway_port": gateway_port,
        "failure_message": str(values["failure_message"]),
        "ui_dir": Path(values["ui_dir"]) if values["ui_dir"] else None,
    }, sources)


def default_priming_path() -> Path:
    import importlib.resources

    return Path(str(importlib.resources.files("macbridge").joinpath("data/priming_default.json")))


def load_priming(path: Path | str) -> list[ChatMessage]:
    """Read a priming fixture: a JSON list of {role, content} objects."""
    raw = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, list):
        raise ParseError(f"{path}: expected a JSON list of messages")
    messages = []
    for i, entry in enumerate(doc):
        if not isinstance(entry, dict) or "role" not in entry or "content" not in entry:
            raise ParseError(f"{path}: message {i} must be an object with role and content")
        if entry["role"] not in ROLES:
            raise InvalidRole(entry["role"], i)
        messages.append(ChatMessage(role=entry["role"], content=str(entry["content"])))
    return messages
