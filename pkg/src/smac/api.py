"""HTTP facade over the corpus: query endpoint, downloads, stats.

All handlers are read-only; ingestion runs out-of-process through the
CLI. Configuration comes from flags or the SMAC_* environment variables.
"""

from __future__ import annotations

import io
import json
import os
import zipfile
from dataclasses import dataclass

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse

from .query import render_response, run_request
from .store import (ARTIFACT_EXTENSIONS, BadAddress, CorpusStore, NotFound,
                    normalize_address, shard_path)

MAX_BODY_BYTES = 1 << 20

_KIND_TO_EXTENSION = {"source": "sol", "abi": "abi", "bytecode": "bytecode"}


@dataclass
class ServiceConfig:
    store_path: str
    bind_address: str = "127.0.0.1:8080"
    max_result_rows: int = 1000
    cors_allowed_origin: str = "*"

    def __post_init__(self):
        if self.max_result_rows < 1:
            raise ValueError("max_result_rows must be >= 1")

    @classmethod
    def from_env(cls, **overrides) -> "ServiceConfig":
        env = {
            "store_path": os.environ.get("SMAC_STORE"),
            "bind_address": os.environ.get("SMAC_BIND"),
            "max_result_rows": os.environ.get("SMAC_MAX_ROWS"),
            "cors_allowed_origin": os.environ.get("SMAC_CORS_ORIGIN"),
        }
        merged = {k: v for k, v in overrides.items() if v is not None}
        for key, value in env.items():  # environment wins over flags
            if value is not None:
                merged[key] = value
        if "max_result_rows" in merged:
            merged["max_result_rows"] = int(merged["max_result_rows"])
        return cls(**merged)

    @property
    def host(self) -> str:
        return self.bind_address.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.bind_address.rsplit(":", 1)[1])


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse({"error": message}, status_code=status)


def create_app(config: ServiceConfig, store: CorpusStore | None = None) -> FastAPI:
    store = store if store is not None else CorpusStore(config.store_path)
    app = FastAPI(title="smart-contract corpus", openapi_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[config.cors_allowed_origin],
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )

    @app.post("/graphql")
    async def graphql(request: Request):
        body = await request.body()
        if len(body) > MAX_BODY_BYTES:
            return _error(413, "request body too large")
        try:
            payload = json.loads(body)
        except ValueError:
            return _error(400, "request body is not valid JSON")
        if not isinstance(payload, dict) or not isinstance(payload.get("query"), str):
            return _error(400, "body must be an object with a 'query' string")
        variables = payload.get("variables") or {}
        if not isinstance(variables, dict):
            return _error(400, "'variables' must be an object")
        envelope = run_request(store, payload["query"], variables,
                               max_rows=config.max_result_rows)
        return Response(render_response(envelope), media_type="application/json")

    @app.get("/contracts/{address}/{kind}")
    def contract_artifact(address: str, kind: str):
        extension = _KIND_TO_EXTENSION.get(kind)
        if extension is None:
            return _error(400, f"kind must be one of {sorted(_KIND_TO_EXTENSION)}")
        try:
            address = normalize_address(address)
        except BadAddress as exc:
            return _error(400, str(exc))
        try:
            _, artifacts = store.get(address)
        except NotFound:
            return _error(404, f"unknown address: {address}")
        content = {"sol": artifacts.source, "abi": artifacts.abi,
                   "bytecode": artifacts.bytecode}[extension]
        return PlainTextResponse(content)

    @app.post("/download")
    async def download(request: Request):
        body = await request.body()
        if len(body) > MAX_BODY_BYTES:
            return _error(413, "request body too large")
        try:
            payload = json.loads(body)
        except ValueError:
            return _error(400, "request body is not valid JSON")
        addresses = payload.get("addresses") if isinstance(payload, dict) else None
        if not isinstance(addresses, list) or not addresses:
            return _error(400, "'addresses' must be a non-empty list")
        if len(addresses) > config.max_result_rows:
            return _error(400, f"at most {config.max_result_rows} addresses per archive")
        archive = build_archive(store, addresses)
        return Response(archive, media_type="application/zip",
                        headers={"Content-Disposition":
                                 "attachment; filename=contracts.zip"})

    @app.get("/stats/daily")
    def stats_daily():
        return daily_counts_payload(store)

    return app


def daily_counts_payload(store: CorpusStore) -> list[dict]:
    return [{"date": day, "count": count} for day, count in store.daily_counts()]


def build_archive(store: CorpusStore, addresses: list) -> bytes:
    """ZIP of artifacts + metadata per address, shard-layout entry names.

    Unknown or malformed addresses land in manifest.json's `missing`
    array instead of failing the archive.
    """
    buffer = io.BytesIO()
    missing: list[str] = []
    with zipfile.ZipFile(buffer, "w", zipfile.ZIP_DEFLATED) as archive:
        for raw in addresses:
            try:
                address = normalize_address(str(raw))
                doc, artifacts = store.get(address)
            except (BadAddress, NotFound):
                missing.append(str(raw))
                continue
            contents = {"sol": artifacts.source, "abi": artifacts.abi,
                        "bytecode": artifacts.bytecode}
            for extension in ARTIFACT_EXTENSIONS:
                archive.writestr(shard_path(address, extension),
                                 contents[extension])
            archive.writestr(f"meta/{address}.json",
                             json.dumps(doc.to_dict(), indent=2))
        archive.writestr("manifest.json", json.dumps(
            {"requested": len(addresses), "missing": missing}, indent=2))
    return buffer.getvalue()
