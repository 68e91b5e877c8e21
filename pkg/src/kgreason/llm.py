"""Chat-completion clients and the two-agent question/answer loop."""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Protocol, Sequence

log = logging.getLogger(__name__)

ROLES = ("system", "user", "assistant")


class LLMError(RuntimeError):
    pass


class TransportError(LLMError):
    pass


class ProviderError(LLMError):
    def __init__(self, message: str, status: int | None = None) -> None:
        super().__init__(message)
        self.status = status


class ScriptExhausted(LLMError):
    pass


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        if not self.content:
            raise ValueError("message content must be non-empty")


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[ChatMessage, ...]
    temperature: float = 0.1
    max_tokens: int = 2048

    def __post_init__(self) -> None:
        if not self.messages:
            raise ValueError("a chat request needs at least one message")
        if not any(m.role == "user" for m in self.messages):
            raise ValueError("a chat request needs a user message")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")

    @classmethod
    def of(cls, user: str, system: str | None = None, **kw) -> "ChatRequest":
        msgs = ([ChatMessage("system", system)] if system else []) + [ChatMessage("user", user)]
        return cls(tuple(msgs), **kw)

    def to_payload(self, model: str) -> dict:
        return {
            "model": model,
            "messages": [asdict(m) for m in self.messages],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }


class ChatClient(Protocol):
    def complete(self, request: ChatRequest) -> str: ...


class ScriptedChat:
    """Offline client replaying an ordered list of responses.

    Every request is recorded in ``requests``. Running past the end of the
    script raises :class:`ScriptExhausted` naming the call index.
    """

    def __init__(self, responses: Iterable[str], audit_dir: str | Path | None = None) -> None:
        self.responses = list(responses)
        self.requests: list[ChatRequest] = []
        self._lock = threading.Lock()
        self.audit = _Audit(audit_dir)

    @classmethod
    def from_file(cls, path: str | Path, **kw) -> "ScriptedChat":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if isinstance(data, dict):
            data = data.get("responses", [])
        if not isinstance(data, list) or not all(isinstance(x, str) for x in data):
            raise ValueError(f"{path}: scripted responses must be a list of strings")
        return cls(data, **kw)

    @property
    def calls(self) -> int:
        return len(self.requests)

    def complete(self, request: ChatRequest) -> str:
        with self._lock:
            i = len(self.requests)
            self.requests.append(request)
            if i >= len(self.responses):
                raise ScriptExhausted(f"scripted chat has no response for call #{i} ({len(self.responses)} queued)")
            out = self.responses[i]
        self.audit.write(request, out)
        return out


class FunctionChat:
    """Offline client computing each reply from the request (useful for order-free fan-out)."""

    def __init__(self, fn: Callable[[ChatRequest], str]) -> None:
        self.fn = fn
        self.requests: list[ChatRequest] = []
        self._lock = threading.Lock()

    def complete(self, request: ChatRequest) -> str:
        with self._lock:
            self.requests.append(request)
        return self.fn(request)


class _Audit:
    def __init__(self, directory: str | Path | None) -> None:
        self.path = Path(directory) / "llm_audit.jsonl" if directory else None
        self._lock = threading.Lock()

    def write(self, request: ChatRequest, response: str) -> None:
        if self.path is None:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        rec = {"request": [asdict(m) for m in request.messages], "temperature": request.temperature,
               "response": response}
        with self._lock, self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


@dataclass
class ProviderConfig:
    base_url: str = "http://localhost:8000/v1"
    model: str = "default"
    api_key_env: str | None = None
    timeout: float = 120.0
    max_retries: int = 3
    backoff: float = 1.0
    max_concurrency: int = 4
    audit_dir: str | None = None


_semaphores: dict[int, threading.BoundedSemaphore] = {}
_sem_lock = threading.Lock()


def _semaphore(n: int) -> threading.BoundedSemaphore:
    with _sem_lock:
        return _semaphores.setdefault(n, threading.BoundedSemaphore(n))


class HTTPChat:
    """Chat-completions JSON client (``POST {base_url}/chat/completions``)."""

    def __init__(self, config: ProviderConfig) -> None:
        self.config = config
        self.audit = _Audit(config.audit_dir)
        self._sem = _semaphore(max(1, config.max_concurrency))

    def complete(self, request: ChatRequest) -> str:
        import requests

        cfg = self.config
        url = cfg.base_url.rstrip("/") + "/chat/completions"
        headers = {"Content-Type": "application/json"}
        if cfg.api_key_env and os.environ.get(cfg.api_key_env):
            headers["Authorization"] = f"Bearer {os.environ[cfg.api_key_env]}"
        payload = request.to_payload(cfg.model)
        last: Exception | None = None
        for attempt in range(cfg.max_retries + 1):
            try:
                with self._sem:
                    resp = requests.post(url, json=payload, headers=headers, timeout=cfg.timeout)
            except (requests.ConnectionError, requests.Timeout) as exc:
                last = exc
                if attempt < cfg.max_retries:
                    time.sleep(cfg.backoff * 2 ** attempt)
                continue
            if resp.status_code != 200:
                raise ProviderError(f"provider returned HTTP {resp.status_code}: {resp.text[:300]}", resp.status_code)
            try:
                text = resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise ProviderError(f"malformed provider response: {exc}", resp.status_code) from exc
            self.audit.write(request, text)
            return text or ""
        raise TransportError(f"request failed after {cfg.max_retries + 1} attempts: {last}")


def complete(request: ChatRequest, client: ChatClient) -> str:
    return client.complete(request)


# ---------------------------------------------------------------------------
# agent duet

FOLLOW_UP_PROMPT = """Consider this question and response.

### Question: {question}

### Response: {response}

### Instruction: Respond with a SINGLE follow-up question that critically challenges the response. 

DO NOT answer the question or comment on it yet. 

The single question is: """

SUMMARY_PROMPT = """Carefully read this conversation: 

<<<{conversation}>>>

Accurately summarize the conversation and identify the key points made.

Think step by step: """

KEY_POINTS_PROMPT = """Carefully read this conversation: 

<<<{conversation}>>>

List the salient insights of the conversation as bullet points."""

TAKEAWAY_PROMPT = (
    "Identify the single most important takeaway in the conversation and how it answers the original "
    "question, <<{question}>>>."
)

CHEF = (
    "You are a chef. You are taking part in a discussion, from the perspective of a chef who owns a restaurant.\n\n"
    "Keep your answers brief, and always challenge statements in a provocative way.\n\n"
    "As a creative individual, you inject ideas from other fields and push the boundaries."
)
ENGINEER = (
    "You are a creative engineer with knowledge in biology, chemistry and mathematics. \n\n"
    "You are taking part in a discussion.\n\n"
    "Keep your answers brief, but accurate, and creative. You come up with excellent ideas and new directions "
    "of thought, always logical. "
)


@dataclass(frozen=True)
class AgentPersona:
    name: str
    system_prompt: str

    def __post_init__(self) -> None:
        if not self.system_prompt.strip():
            raise ValueError("persona system prompt must be non-empty")


@dataclass
class Turn:
    question: str
    answer: str


@dataclass
class Transcript:
    question: str
    asker: str = "asker"
    responder: str = "responder"
    turns: list[Turn] = field(default_factory=list)
    summary: str = ""
    key_points: str = ""
    takeaway: str = ""

    def conversation_text(self) -> str:
        lines = []
        for t in self.turns:
            lines += [f"Asker: {t.question}", f"Responder: {t.answer}"]
        return "\n\n".join(lines)

    def full_text(self) -> str:
        """Conversation followed by summary, key points and takeaway."""
        parts = [self.conversation_text()]
        for title, body in (("Summary", self.summary), ("Key points", self.key_points), ("Takeaway", self.takeaway)):
            if body:
                parts.append(f"### {title}\n\n{body}")
        return "\n\n".join(parts) + "\n"

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Transcript":
        data = json.loads(text)
        data["turns"] = [Turn(**t) for t in data.get("turns", [])]
        return cls(**data)


class DuetError(LLMError):
    def __init__(self, message: str, transcript: Transcript) -> None:
        super().__init__(message)
        self.transcript = transcript


def run_agent_duet(question: str, asker: AgentPersona, responder: AgentPersona, turns: int, llm: ChatClient,
                   temperature: float = 0.7, max_tokens: int = 1024) -> Transcript:
    """Responder answers ``question``; then ``turns`` rounds of challenge and answer.

    Uses exactly ``2 * turns + 1`` completions. The responder sees the full
    prior exchange; the asker sees only the latest question and answer.
    """
    if turns < 0:
        raise ValueError("turns must be >= 0")
    tr = Transcript(question, asker.name, responder.name)
    history: list[ChatMessage] = [ChatMessage("system", responder.system_prompt)]

    def ask(msgs: list[ChatMessage]) -> str:
        try:
            out = llm.complete(ChatRequest(tuple(msgs), temperature, max_tokens))
        except LLMError as exc:
            raise DuetError(f"duet aborted after {len(tr.turns)} turns: {exc}", tr) from exc
        if not out.strip():
            raise DuetError(f"empty completion after {len(tr.turns)} turns", tr)
        return out.strip()

    q = question
    for r in range(turns + 1):
        if r:
            prompt = FOLLOW_UP_PROMPT.format(question=tr.turns[-1].question, response=tr.turns[-1].answer)
            q = ask([ChatMessage("system", asker.system_prompt), ChatMessage("user", prompt)])
        history.append(ChatMessage("user", q))
        a = ask(history)
        history.append(ChatMessage("assistant", a))
        tr.turns.append(Turn(q, a))
    return tr


def summarize_transcript(transcript: Transcript, llm: ChatClient, system: str | None = None) -> Transcript:
    """Fill ``summary``, ``key_points`` and ``takeaway`` (three completions, in that order)."""
    if not transcript.turns:
        raise ValueError("cannot summarize an empty transcript")
    conv = transcript.conversation_text()
    outs = []
    for prompt in (SUMMARY_PROMPT.format(conversation=conv), KEY_POINTS_PROMPT.format(conversation=conv),
                   TAKEAWAY_PROMPT.format(question=transcript.question)):
        outs.append(llm.complete(ChatRequest.of(prompt, system, temperature=0.1)).strip())
    transcript.summary, transcript.key_points, transcript.takeaway = outs
    return transcript


def make_client(kind: str, config: ProviderConfig | None = None, script: str | Path | None = None,
                responses: Sequence[str] | None = None) -> ChatClient:
    if kind == "mock":
        if responses is not None:
            return ScriptedChat(responses, audit_dir=config.audit_dir if config else None)
        if script is None:
            raise ValueError("mock chat provider needs a script file")
        return ScriptedChat.from_file(script, audit_dir=config.audit_dir if config else None)
    if kind == "http":
        return HTTPChat(config or ProviderConfig())
    raise ValueError(f"unknown chat provider kind {kind!r}")
