"""Read-only HTTP service over a built search index.

Endpoints (all JSON, CORS-enabled for the browser UI):
  GET /api/search?q=&year=&candidate=&limit=
  GET /api/ads/{ad_id}
  GET /api/years
  GET /api/candidates?year=
Storyboard stills are served from the outputs tree under /media, and the
built UI (when provided) from /.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .search import EmptyQuery, SearchIndex, query

logger = logging.getLogger(__name__)


def create_app(
    index: SearchIndex,
    media_root: Optional[Path] = None,
    ui_dir: Optional[Path] = None,
    cors_origins: tuple[str, ...] = ("*",),
) -> FastAPI:
    app = FastAPI(title="spotforge search", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["GET"],
        allow_headers=["*"],
    )

    @app.get("/api/search")
    def api_search(
        q: Optional[str] = None,
        year: Optional[int] = None,
        candidate: Optional[str] = None,
        limit: int = Query(default=50, ge=0, le=500),
    ) -> JSONResponse:
        if q is None or not q.strip():
            return JSONResponse(
                status_code=400, content={"error": "missing or empty query parameter q"}
            )
        try:
            hits = query(index, q, year=year, candidate_last=candidate, limit=limit)
        except EmptyQuery:
            return JSONResponse(status_code=400, content={"error": "empty query"})
        return JSONResponse(content={"hits": [h.to_json() for h in hits]})

    @app.get("/api/ads/{ad_id}")
    def api_ad(ad_id: str) -> dict:
        ad = index.ads.get(ad_id)
        if ad is None:
            raise HTTPException(status_code=404, detail=f"no ad with id {ad_id}")
        return {
            "ad_id": ad.ad_id,
            "year": ad.year,
            "candidate": ad.candidate,
            "party": ad.party,
            "title": ad.title,
            "attack_ad": ad.attack_ad,
            "duration_s": ad.duration_s,
            "video_path": ad.video_path,
            "transcript": {
                "segments": [
                    {"start_s": s, "end_s": e, "text": t} for s, e, t in ad.segments
                ],
                "full_text": ad.text,
            },
            "summary": ad.summary,
            "frames": [
                {
                    "timestamp_s": f["timestamp_s"],
                    "origin": f["origin"],
                    "image_url": f"/media/{f['image_path']}",
                }
                for f in ad.frames
            ],
        }

    @app.get("/api/years")
    def api_years() -> dict:
        return {"years": index.years()}

    @app.get("/api/candidates")
    def api_candidates(year: Optional[int] = None) -> dict:
        return {"candidates": index.candidates(year)}

    if media_root is not None:
        app.mount("/media", StaticFiles(directory=str(media_root)), name="media")
    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app


def serve(
    index: SearchIndex,
    bind: str,
    media_root: Optional[Path] = None,
    ui_dir: Optional[Path] = None,
) -> None:
    """Run the service until interrupted. ``bind`` is HOST:PORT."""
    import uvicorn

    host, _, port_str = bind.rpartition(":")
    if not host or not port_str.isdigit():
        raise ValueError(f"bind address must be HOST:PORT, got {bind!r}")
    app = create_app(index, media_root=media_root, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=int(port_str), log_level="info")


__all__ = ["create_app", "serve"]
