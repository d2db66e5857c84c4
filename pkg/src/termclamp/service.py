"""Interactive sessions over HTTP, plus the batch entry point the CLI uses.

A session holds the current term, a monotonically increasing revision, the
loaded rule set, and the application history.  Every state change bumps the
revision by exactly one; applying a candidate requires the revision it was
enumerated at, so a stale choice can never mutate the session (it gets a
conflict instead and the client re-enumerates).  Candidate enumeration is
deterministic, which is what makes index-addressed application sound.

Sessions live in memory.  Each one serializes its state-changing operations
behind a lock; distinct sessions are fully independent.
"""

from __future__ import annotations

import os
import threading
import uuid
from dataclasses import dataclass, field

from .amb import EnumerationBudget
from .matcher import MatchCandidate
from .parser import ParseError, SymbolRegistry, parse_term
from .render import FORMATS, highlight_spec_for, render, render_term_with_candidate
from .rules import (
    RuleApplication,
    RuleFileError,
    SofpaRule,
    StaleSiteError,
    apply_rule_at,
    enumerate_rule_sites,
    instantiate_templates,
    load_rules_file,
)
from .standard import load_standard_rules, standard_registry
from .terms import Term

RULES_ENV_VAR = "TERMCLAMP_RULES"
BUILTIN_RULES = "<builtin>"

DEFAULT_BUDGET = EnumerationBudget(max_results=1000, max_steps=10**6)


class ServiceError(Exception):
    """Machine-readable service failure: a short code plus a message."""

    def __init__(self, code: str, message: str, http_status: int = 400, **details):
        super().__init__(message)
        self.code = code
        self.message = message
        self.http_status = http_status
        self.details = details

    def payload(self) -> dict:
        body = {"code": self.code, "message": self.message}
        body.update(self.details)
        return body


@dataclass
class HistoryEntry:
    application: RuleApplication
    candidate_index: int
    term_before: Term
    term_after: Term
    revision: int


@dataclass
class Session:
    id: str
    registry: SymbolRegistry
    rules: dict
    rules_ref: str
    budget: EnumerationBudget = DEFAULT_BUDGET
    current: Term = field(default_factory=Term)
    base_term: Term = field(default_factory=Term)
    revision: int = 0
    history: list = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)


def _load_rules(rules_file: str | None, registry: SymbolRegistry):
    """Resolve the rule source: explicit path, env var, or the builtin file."""
    path = rules_file or os.environ.get(RULES_ENV_VAR)
    if path:
        try:
            return load_rules_file(path, registry), path
        except FileNotFoundError:
            raise ServiceError("bad_rules", "rule file not found: %s" % path, 400)
        except RuleFileError as exc:
            raise ServiceError("bad_rules", str(exc), 400)
    return load_standard_rules(registry), BUILTIN_RULES


class SessionManager:
    def __init__(self, budget: EnumerationBudget = DEFAULT_BUDGET):
        self._sessions: dict = {}
        self._lock = threading.Lock()
        self.budget = budget

    def create(self, rules_file: str | None = None) -> Session:
        registry = standard_registry()
        rules, ref = _load_rules(rules_file, registry)
        session = Session(
            id=uuid.uuid4().hex,
            registry=registry,
            rules=rules,
            rules_ref=ref,
            budget=self.budget,
        )
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise ServiceError("not_found", "no session %r" % session_id, 404)
        return session


# ---------------------------------------------------------------------------
# session operations


def _check_formats(formats) -> tuple:
    for fmt in formats:
        if fmt not in FORMATS:
            raise ServiceError("bad_format", "unknown format %r" % fmt, 400)
    return tuple(formats)


def _rule_for(session: Session, rule_name: str) -> SofpaRule:
    rule = session.rules.get(rule_name)
    if rule is None:
        raise ServiceError("unknown_rule", "no rule %r in this session" % rule_name, 404)
    return rule


def submit_term(session: Session, text: str) -> dict:
    with session.lock:
        try:
            term = parse_term(text, session.registry)
        except ParseError as exc:
            raise ServiceError(
                "parse_error", exc.reason, 400, line=exc.line, column=exc.column
            )
        session.current = term
        session.base_term = term
        session.history.clear()
        session.revision += 1
        return {
            "revision": session.revision,
            "term": {"ascii": render(term, "ascii", session.registry)},
        }


def list_rules(session: Session) -> dict:
    with session.lock:
        return {
            "revision": session.revision,
            "rules": [
                {
                    "name": rule.name,
                    "description": rule.description,
                    "chains": len(rule.pattern.chains),
                }
                for rule in session.rules.values()
            ],
        }


def list_candidates(session: Session, rule_name: str, formats=("ascii",)) -> dict:
    formats = _check_formats(formats)
    with session.lock:
        rule = _rule_for(session, rule_name)
        term = session.current
        revision = session.revision
        enumeration = enumerate_rule_sites(term, rule, budget=session.budget)
        candidates = []
        for index, (summand_index, candidate) in enumerate(enumeration.sites):
            spec = highlight_spec_for(candidate, rule.highlighting)
            renderings = {
                fmt: render_term_with_candidate(term, summand_index, spec, fmt, session.registry)
                for fmt in formats
            }
            candidates.append(
                {
                    "index": index,
                    "summand": summand_index,
                    "spans": [list(span) for span in candidate.matched_spans()],
                    "renderings": renderings,
                }
            )
        return {
            "revision": revision,
            "rule": rule_name,
            "truncated": enumeration.truncated,
            "candidates": candidates,
        }


def apply_candidate(session: Session, rule_name: str, candidate_index: int, revision: int) -> dict:
    with session.lock:
        rule = _rule_for(session, rule_name)
        if revision != session.revision:
            raise ServiceError(
                "conflict",
                "revision %d is stale (current is %d); re-enumerate candidates"
                % (revision, session.revision),
                409,
                revision=session.revision,
            )
        enumeration = enumerate_rule_sites(session.current, rule, budget=session.budget)
        if not 0 <= candidate_index < len(enumeration.sites):
            raise ServiceError(
                "range",
                "candidate %d out of range (%d candidates)"
                % (candidate_index, len(enumeration.sites)),
                400,
                revision=session.revision,
            )
        site = enumeration.sites[candidate_index]
        before = session.current
        try:
            after = apply_rule_at(before, site, rule)
        except StaleSiteError as exc:
            raise ServiceError("conflict", str(exc), 409, revision=session.revision)
        summand_index, candidate = site
        application = RuleApplication(
            rule_name=rule_name,
            summand_index=summand_index,
            candidate=candidate,
            produced=instantiate_templates(rule, candidate, before.summands[summand_index]),
        )
        session.current = after
        session.revision += 1
        session.history.append(
            HistoryEntry(
                application=application,
                candidate_index=candidate_index,
                term_before=before,
                term_after=after,
                revision=session.revision,
            )
        )
        return {
            "revision": session.revision,
            "term": {"ascii": render(after, "ascii", session.registry)},
        }


def undo(session: Session) -> dict:
    with session.lock:
        if not session.history:
            raise ServiceError(
                "empty_history", "nothing to undo", 409, revision=session.revision
            )
        entry = session.history.pop()
        session.current = entry.term_before
        session.revision += 1
        return {
            "revision": session.revision,
            "term": {"ascii": render(session.current, "ascii", session.registry)},
        }


def history(session: Session) -> dict:
    with session.lock:
        return {
            "revision": session.revision,
            "rules_ref": session.rules_ref,
            "base": render(session.base_term, "ascii", session.registry),
            "current": render(session.current, "ascii", session.registry),
            "entries": [
                {
                    "rule": entry.application.rule_name,
                    "summand": entry.application.summand_index,
                    "candidate": entry.candidate_index,
                    "revision": entry.revision,
                    "term": render(entry.term_after, "ascii", session.registry),
                }
                for entry in session.history
            ],
        }


def write_snapshot(session: Session, path) -> None:
    """Dump the session to a file: rule file reference plus terms and history
    in ASCII.  Sessions live in memory; this is the on-demand durability."""
    import json

    with open(path, "w", encoding="utf-8") as handle:
        json.dump(history(session), handle, indent=2)
        handle.write("\n")


def render_current(session: Session, fmt: str) -> dict:
    _check_formats((fmt,))
    with session.lock:
        return {
            "revision": session.revision,
            "format": fmt,
            "rendered": render(session.current, fmt, session.registry),
        }


# ---------------------------------------------------------------------------
# batch entry point (CLI)


def batch_apply(term_text: str, rule_name: str, site="all", formats=("ascii",),
                rules_file: str | None = None) -> list:
    """Apply a rule to a term non-interactively.

    site="all" applies at every site, each independently to the input term,
    one result per site; site=k applies exactly that site.  Results are dicts
    of renderings per requested format.
    """
    formats = _check_formats(formats)
    registry = standard_registry()
    rules, _ = _load_rules(rules_file, registry)
    rule = rules.get(rule_name)
    if rule is None:
        raise ServiceError("unknown_rule", "no rule %r" % rule_name, 404)
    try:
        term = parse_term(term_text, registry)
    except ParseError as exc:
        raise ServiceError("parse_error", exc.reason, 400, line=exc.line, column=exc.column)
    enumeration = enumerate_rule_sites(term, rule)
    sites = enumeration.sites
    if site == "all":
        chosen = list(enumerate(sites))
    else:
        if not 0 <= site < len(sites):
            raise ServiceError(
                "range", "site %d out of range (%d sites)" % (site, len(sites)), 400
            )
        chosen = [(site, sites[site])]
    results = []
    for index, one_site in chosen:
        applied = apply_rule_at(term, one_site, rule)
        results.append(
            {
                "site": index,
                "renderings": {fmt: render(applied, fmt, registry) for fmt in formats},
            }
        )
    return results


# ---------------------------------------------------------------------------
# HTTP app


def create_app(manager: SessionManager | None = None):
    from fastapi import FastAPI, Request
    from fastapi.middleware.cors import CORSMiddleware
    from fastapi.responses import JSONResponse

    manager = manager or SessionManager()
    app = FastAPI(title="termclamp", version="0.1.0")
    app.state.manager = manager
    # the browser front-end is served statically from wherever; sessions are
    # unauthenticated desk-scale state, so open CORS costs nothing
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(ServiceError)
    async def service_error_handler(request: Request, exc: ServiceError):
        body = {"error": exc.payload()}
        if "revision" in exc.details:
            body["revision"] = exc.details["revision"]
        return JSONResponse(status_code=exc.http_status, content=body)

    @app.post("/sessions")
    async def create_session(body: dict | None = None):
        body = body or {}
        session = manager.create(body.get("rules_file"))
        return {
            "id": session.id,
            "revision": session.revision,
            "rules": list(session.rules),
        }

    @app.post("/sessions/{session_id}/term")
    async def post_term(session_id: str, body: dict):
        session = manager.get(session_id)
        if "term" not in body:
            raise ServiceError("bad_request", "body needs a 'term' field", 400)
        return submit_term(session, body["term"])

    @app.get("/sessions/{session_id}/rules")
    async def get_rules(session_id: str):
        return list_rules(manager.get(session_id))

    @app.get("/sessions/{session_id}/candidates")
    async def get_candidates(session_id: str, rule: str, format: str = "ascii"):
        session = manager.get(session_id)
        formats = tuple(f.strip() for f in format.split(",") if f.strip())
        return list_candidates(session, rule, formats)

    @app.post("/sessions/{session_id}/apply")
    async def post_apply(session_id: str, body: dict):
        session = manager.get(session_id)
        for key in ("rule", "candidate", "revision"):
            if key not in body:
                raise ServiceError("bad_request", "body needs a %r field" % key, 400)
        return apply_candidate(session, body["rule"], body["candidate"], body["revision"])

    @app.post("/sessions/{session_id}/undo")
    async def post_undo(session_id: str):
        return undo(manager.get(session_id))

    @app.get("/sessions/{session_id}/history")
    async def get_history(session_id: str):
        return history(manager.get(session_id))

    @app.get("/sessions/{session_id}/render")
    async def get_render(session_id: str, format: str = "ascii"):
        return render_current(manager.get(session_id), format)

    return app
