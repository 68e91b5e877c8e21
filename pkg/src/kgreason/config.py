"""Run configuration loaded from a TOML document.

Layout (every key optional)::

    run_dir = "runs/default"
    seed = 42

    [chat]                  # kind = "mock" | "http"
    kind = "mock"
    script = "script.json"  # mock only: JSON list of response strings
    base_url = "http://localhost:8000/v1"
    model = "default"
    api_key_env = "OPENAI_API_KEY"
    timeout = 120.0
    max_retries = 3
    max_concurrency = 4

    [embedding]             # kind = "mock" | "http"
    kind = "mock"
    dimension = 1024
    url = "http://localhost:8001/v1/embeddings"
    model = "default"
    api_key_env = "EMBEDDING_API_KEY"
    max_input_tokens = 512
    batch_size = 64
    workers = 1

    [pipeline]
    target_words = 800      # >= 50
    eta = 0.95              # (0, 1]
    prune_threshold = 10    # >= 0, 0 disables pruning
    k = 2                   # >= 1
    expansion_hops = 1      # 0, 1 or 2
    workers = 1             # >= 1
    temperature = 0.1       # >= 0

    [isomorphism]
    min_nodes = 15
    min_avg_degree = 2.0
    search_scope = "giant_components_only"
    max_mappings = 5
    timeout = 5.0

Secrets never live in the file: ``api_key_env`` names an environment variable
and the key is read from there at request time. No other setting is taken
from the environment.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .embedding import HashEmbedder, HTTPEmbedder
from .isomorphism import IsoConstraints
from .llm import ChatClient, ProviderConfig, make_client


class ConfigError(ValueError):
    pass


@dataclass
class ChatSettings:
    kind: str = "mock"
    script: str | None = None
    base_url: str = "http://localhost:8000/v1"
    model: str = "default"
    api_key_env: str | None = None
    timeout: float = 120.0
    max_retries: int = 3
    max_concurrency: int = 4


@dataclass
class EmbeddingSettings:
    kind: str = "mock"
    dimension: int = 1024
    url: str = "http://localhost:8001/v1/embeddings"
    model: str = "default"
    api_key_env: str | None = None
    max_input_tokens: int = 512
    batch_size: int = 64
    workers: int = 1


@dataclass
class PipelineSettings:
    target_words: int = 800
    eta: float = 0.95
    prune_threshold: int = 10
    k: int = 2
    expansion_hops: int = 1
    workers: int = 1
    temperature: float = 0.1


@dataclass
class IsoSettings:
    min_nodes: int = 15
    min_avg_degree: float = 2.0
    search_scope: str = "giant_components_only"
    max_mappings: int = 5
    timeout: float = 5.0


@dataclass
class RunConfig:
    run_dir: str = "runs/default"
    seed: int = 42
    chat: ChatSettings = field(default_factory=ChatSettings)
    embedding: EmbeddingSettings = field(default_factory=EmbeddingSettings)
    pipeline: PipelineSettings = field(default_factory=PipelineSettings)
    isomorphism: IsoSettings = field(default_factory=IsoSettings)

    def validate(self) -> "RunConfig":
        p, e, c, i = self.pipeline, self.embedding, self.chat, self.isomorphism
        checks = [
            (p.target_words >= 50, "pipeline.target_words must be >= 50"),
            (0.0 < p.eta <= 1.0, "pipeline.eta must be in (0, 1]"),
            (p.prune_threshold >= 0, "pipeline.prune_threshold must be >= 0"),
            (p.k >= 1, "pipeline.k must be >= 1"),
            (p.expansion_hops in (0, 1, 2), "pipeline.expansion_hops must be 0, 1 or 2"),
            (p.workers >= 1, "pipeline.workers must be >= 1"),
            (p.temperature >= 0, "pipeline.temperature must be >= 0"),
            (c.kind in ("mock", "http"), "chat.kind must be 'mock' or 'http'"),
            (c.timeout > 0 and c.max_retries >= 0 and c.max_concurrency >= 1, "chat limits out of range"),
            (e.kind in ("mock", "http"), "embedding.kind must be 'mock' or 'http'"),
            (e.dimension >= 1 and e.max_input_tokens >= 1, "embedding sizes must be positive"),
            (e.batch_size >= 1 and e.workers >= 1, "embedding.batch_size and workers must be >= 1"),
            (i.min_nodes >= 2, "isomorphism.min_nodes must be >= 2"),
            (i.min_avg_degree >= 0, "isomorphism.min_avg_degree must be >= 0"),
            (i.max_mappings >= 1 and i.timeout > 0, "isomorphism limits out of range"),
            (i.search_scope in ("giant_components_only", "full"), "isomorphism.search_scope is invalid"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        return self

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)

    def iso_constraints(self) -> IsoConstraints:
        i = self.isomorphism
        return IsoConstraints(min_nodes=i.min_nodes, min_avg_degree=i.min_avg_degree, search_scope=i.search_scope,
                              max_mappings=i.max_mappings, timeout=i.timeout)

    def chat_client(self, audit_dir: str | Path | None = None) -> ChatClient:
        c = self.chat
        pc = ProviderConfig(base_url=c.base_url, model=c.model, api_key_env=c.api_key_env, timeout=c.timeout,
                            max_retries=c.max_retries, max_concurrency=c.max_concurrency,
                            audit_dir=str(audit_dir) if audit_dir else None)
        return make_client(c.kind, pc, script=c.script)

    def embedder(self):
        e = self.embedding
        if e.kind == "mock":
            return HashEmbedder(dimension=e.dimension, seed=self.seed, max_input_tokens=e.max_input_tokens)
        return HTTPEmbedder(e.url, e.model, e.dimension, e.max_input_tokens, api_key_env=e.api_key_env)

    def api_key(self, which: str = "chat") -> str | None:
        """Value of the configured key variable, if set in the environment."""
        name = getattr(self, which).api_key_env
        return os.environ.get(name) if name else None


_SECTIONS = {"chat": ChatSettings, "embedding": EmbeddingSettings, "pipeline": PipelineSettings,
             "isomorphism": IsoSettings}


def _section(cls, data: dict, name: str):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(sorted(unknown))}")
    return cls(**data)


def config_from_dict(data: dict[str, Any]) -> RunConfig:
    kw: dict[str, Any] = {}
    for key, value in data.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"[{key}] must be a table")
            kw[key] = _section(_SECTIONS[key], value, key)
        elif key in ("run_dir", "seed"):
            kw[key] = value
        elif key in ("api_key", "secret"):
            raise ConfigError("secrets must come from the environment; name the variable with api_key_env")
        else:
            raise ConfigError(f"unknown top-level key {key!r}")
    return RunConfig(**kw).validate()


def load_config(path: str | Path | None = None) -> RunConfig:
    if path is None:
        return RunConfig().validate()
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    cfg = config_from_dict(data)
    # relative script paths resolve against the config file
    if cfg.chat.script and not Path(cfg.chat.script).is_absolute():
        cfg.chat.script = str(path.parent / cfg.chat.script)
    return cfg
