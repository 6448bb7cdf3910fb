"""HTTP annotation service: the human-in-the-loop side of the pipeline.

Exposes sequences, representative images, annotation upload with
synchronous (default) or async propagation, and evaluation metrics, all
backed by the same workspace files and code paths as the CLI. One service
instance per workspace; all disk mutation funnels through the workspace
writer lock.
"""
from __future__ import annotations

import datetime
import hashlib
import json
import threading
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse

from .core.maskio import decode_mask_png
from .core.images import image_size
from .core.types import IGNORE
from .errors import (
    MissingFile,
    NoOverlap,
    SeqLabelError,
    UnsupportedPng,
    ValueOutOfRange,
    WorkspaceLocked,
)
from .workspace import (
    STATUS_PROPAGATED,
    Workspace,
    atomic_write_bytes,
    class_palette,
    evaluation_doc,
    propagate_and_store,
)

MAX_UPLOAD_BYTES = 32 * 1024 * 1024

_MEDIA_TYPES = {".png": "image/png", ".jpg": "image/jpeg", ".jpeg": "image/jpeg"}


def _error(status: int, message: str, **extra) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message, **extra})


def _isoformat(ts: float) -> str:
    return datetime.datetime.fromtimestamp(ts, tz=datetime.timezone.utc).isoformat()


class ServiceState:
    def __init__(self, workspace: Workspace):
        self.workspace = workspace
        self.write_mutex = threading.Lock()
        self.async_errors: dict[str, str] = {}


def _session_doc(state: ServiceState, sequence) -> dict:
    ws = state.workspace
    annotation = ws.annotation_path(sequence.id)
    summary = {}
    for image_id in sequence.image_ids:
        report = ws.merge_report_path(image_id)
        if report.is_file():
            summary[image_id] = json.loads(report.read_text(encoding="utf-8"))
    doc = {
        "sequence_id": sequence.id,
        "image_ids": list(sequence.image_ids),
        "representative_id": sequence.representative_id,
        "status": ws.sequence_status(sequence),
        "annotated_at": _isoformat(annotation.stat().st_mtime) if annotation.is_file() else None,
        "propagation_summary": summary,
    }
    if sequence.id in state.async_errors:
        doc["propagation_error"] = state.async_errors[sequence.id]
    return doc


def _sequence_etag(state: ServiceState, sequence) -> str:
    ws = state.workspace
    h = hashlib.sha1()
    for path in [ws.annotation_path(sequence.id)] + [
        ws.merged_path(i) for i in sequence.image_ids
    ]:
        if path.is_file():
            stat = path.stat()
            h.update(f"{path.name}:{stat.st_mtime_ns}:{stat.st_size};".encode())
    return h.hexdigest()


def create_app(workspace_root: Path | str, ui_dir: Optional[Path | str] = None) -> FastAPI:
    state = ServiceState(Workspace(workspace_root))
    app = FastAPI(title="seqlabel annotation service")
    app.state.seqlabel = state

    def sequences_or_error():
        ws = state.workspace
        if not ws.sequences_path.is_file():
            return None
        return ws.load_sequences()

    @app.exception_handler(SeqLabelError)
    def _domain_error(request: Request, exc: SeqLabelError):
        if isinstance(exc, WorkspaceLocked):
            return _error(423, str(exc))
        if isinstance(exc, (MissingFile, NoOverlap)):
            return _error(404, str(exc))
        return _error(400, str(exc))

    @app.get("/api/v1/sequences")
    def list_sequences():
        sset = sequences_or_error()
        if sset is None:
            return _error(409, "workspace has no sequences.json (run the sequence stage first)")
        ws = state.workspace
        return [
            {
                "id": seq.id,
                "size": len(seq.image_ids),
                "representative_id": seq.representative_id,
                "status": ws.sequence_status(seq),
            }
            for seq in sset.sequences
        ]

    @app.get("/api/v1/sequences/{sequence_id}")
    def sequence_detail(sequence_id: str, response: Response):
        sset = sequences_or_error()
        if sset is None:
            return _error(409, "workspace has no sequences.json")
        try:
            seq = sset.by_id(sequence_id)
        except SeqLabelError:
            return _error(404, f"unknown sequence {sequence_id!r}")
        response.headers["ETag"] = _sequence_etag(state, seq)
        return _session_doc(state, seq)

    @app.get("/api/v1/sequences/{sequence_id}/propagation")
    def propagation_status(sequence_id: str):
        sset = sequences_or_error()
        if sset is None:
            return _error(409, "workspace has no sequences.json")
        try:
            seq = sset.by_id(sequence_id)
        except SeqLabelError:
            return _error(404, f"unknown sequence {sequence_id!r}")
        doc = {"sequence_id": sequence_id, "status": state.workspace.sequence_status(seq)}
        if sequence_id in state.async_errors:
            doc["error"] = state.async_errors[sequence_id]
        return doc

    def _member_or_none(sequence_id: str, image_id: str):
        sset = sequences_or_error()
        if sset is None:
            return None
        try:
            seq = sset.by_id(sequence_id)
        except SeqLabelError:
            return None
        return seq if image_id in seq.image_ids else None

    @app.get("/api/v1/sequences/{sequence_id}/images/{image_id}")
    def get_image(sequence_id: str, image_id: str):
        if _member_or_none(sequence_id, image_id) is None:
            return _error(404, f"unknown sequence/image {sequence_id!r}/{image_id!r}")
        manifest = state.workspace.load_manifest()
        rec = manifest.by_id(image_id)
        if not rec.image_path.is_file():
            return _error(404, f"image file missing for {image_id!r}")
        media = _MEDIA_TYPES.get(rec.image_path.suffix.lower(), "application/octet-stream")
        return Response(content=rec.image_path.read_bytes(), media_type=media)

    def _mask_response(path: Path, what: str):
        if not path.is_file():
            return _error(404, f"no {what} mask at {path.name}")
        return Response(content=path.read_bytes(), media_type="image/png")

    @app.get("/api/v1/sequences/{sequence_id}/images/{image_id}/campseudo")
    def get_campseudo(sequence_id: str, image_id: str):
        if _member_or_none(sequence_id, image_id) is None:
            return _error(404, f"unknown sequence/image {sequence_id!r}/{image_id!r}")
        return _mask_response(state.workspace.campseudo_path(image_id), "campseudo")

    @app.get("/api/v1/sequences/{sequence_id}/images/{image_id}/merged")
    def get_merged(sequence_id: str, image_id: str):
        if _member_or_none(sequence_id, image_id) is None:
            return _error(404, f"unknown sequence/image {sequence_id!r}/{image_id!r}")
        return _mask_response(state.workspace.merged_path(image_id), "merged")

    @app.get("/api/v1/sequences/{sequence_id}/annotation")
    def get_annotation(sequence_id: str):
        sset = sequences_or_error()
        if sset is None:
            return _error(409, "workspace has no sequences.json")
        try:
            sset.by_id(sequence_id)
        except SeqLabelError:
            return _error(404, f"unknown sequence {sequence_id!r}")
        return _mask_response(state.workspace.annotation_path(sequence_id), "annotation")

    @app.get("/api/v1/legend")
    def get_legend():
        manifest = state.workspace.load_manifest()
        return class_palette(manifest.classes)

    @app.put("/api/v1/sequences/{sequence_id}/annotation")
    async def put_annotation(
        sequence_id: str, request: Request, async_: int = Query(default=0, alias="async")
    ):
        declared = request.headers.get("content-length")
        if declared is not None and int(declared) > MAX_UPLOAD_BYTES:
            return _error(413, f"annotation exceeds {MAX_UPLOAD_BYTES} bytes")
        body = await request.body()
        if len(body) > MAX_UPLOAD_BYTES:
            return _error(413, f"annotation exceeds {MAX_UPLOAD_BYTES} bytes")

        sset = sequences_or_error()
        if sset is None:
            return _error(409, "workspace has no sequences.json")
        try:
            seq = sset.by_id(sequence_id)
        except SeqLabelError:
            return _error(404, f"unknown sequence {sequence_id!r}")

        ws = state.workspace
        manifest = ws.load_manifest()
        try:
            mask = decode_mask_png(body, manifest.classes)
        except UnsupportedPng as exc:
            return _error(400, f"invalid mask: {exc}")
        except ValueOutOfRange as exc:
            return _error(400, f"invalid mask: {exc}")
        if (mask.data == IGNORE).any():
            return _error(400, "invalid mask: ignore pixels not allowed")
        rec = manifest.by_id(seq.representative_id)
        width, height = image_size(rec.image_path)
        if (mask.width, mask.height) != (width, height):
            return _error(
                400,
                f"invalid mask: dimensions {mask.width}x{mask.height} do not match "
                f"representative image {width}x{height}",
            )

        def store_and_propagate():
            with state.write_mutex:
                with ws.writer_lock(timeout=5.0):
                    ws.ensure_layout()
                    atomic_write_bytes(ws.annotation_path(seq.id), body)
                    propagate_and_store(ws, seq, mask, manifest.classes)

        if async_:
            with state.write_mutex:
                with ws.writer_lock(timeout=5.0):
                    ws.ensure_layout()
                    atomic_write_bytes(ws.annotation_path(seq.id), body)
            state.async_errors.pop(seq.id, None)

            def background():
                try:
                    with state.write_mutex:
                        with ws.writer_lock(timeout=30.0):
                            propagate_and_store(ws, seq, mask, manifest.classes)
                except Exception as exc:  # surfaced via the poll endpoint
                    state.async_errors[seq.id] = str(exc)

            threading.Thread(target=background, daemon=True).start()
            return JSONResponse(
                status_code=202,
                content={
                    "sequence_id": seq.id,
                    "poll": f"/api/v1/sequences/{seq.id}/propagation",
                },
            )

        store_and_propagate()
        state.async_errors.pop(seq.id, None)
        return _session_doc(state, seq)

    @app.get("/api/v1/metrics")
    def get_metrics(against: str = Query(default="gt")):
        if against != "gt":
            return _error(400, f"unsupported comparison target {against!r}")
        ws = state.workspace
        manifest = ws.load_manifest()
        try:
            return evaluation_doc(manifest, ws.merged_dir)
        except NoOverlap as exc:
            return _error(404, str(exc))

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def serve(
    workspace_root: Path | str,
    host: str = "127.0.0.1",
    port: int = 8077,
    ui_dir: Optional[Path | str] = None,
) -> None:
    """Run exactly one service instance per workspace (enforced by a lock)."""
    import uvicorn
    from filelock import FileLock, Timeout

    root = Path(workspace_root)
    root.mkdir(parents=True, exist_ok=True)
    instance_lock = FileLock(str(root / ".service.lock"))
    try:
        with instance_lock.acquire(timeout=0.1):
            uvicorn.run(create_app(root, ui_dir=ui_dir), host=host, port=port, log_level="info")
    except Timeout:
        raise WorkspaceLocked(f"another service instance already owns {root}") from None
