"""Local HTTP facade for the human review loop.

The operator browses species, previews candidate configs (pure
computation, nothing persisted), and accepts labels. Accepted labels and
per-species configs are written to disk on every mutation with a
write-then-rename so the state file is always a complete document.
Preview overlays are downscaled for latency; accepted labels are always
full resolution and byte-identical to CLI output for the same config.
"""
from __future__ import annotations

import base64
import hashlib
import io
import json
import os
import tempfile
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import Response
from PIL import Image

from .errors import UnknownImageError, UnknownSpeciesError
from .imaging import BinaryMask, RasterImage, load_image, overlay
from .labels import mask_to_label, save_label
from .pipeline import (CONFIG_SCHEMA_VERSION, DatasetManifest, SpeciesConfig,
                       annotate_image, annotate_image_with_details, ingest_dibas)

PREVIEW_MAX_DIM = 1024
OVERLAY_COLOR = (255, 64, 64)
OVERLAY_ALPHA = 0.45
PORT_ENV_VAR = "BACTOSEG_PORT"


@dataclass
class Session:
    """Review state: manifest, chosen configs, per-image accept progress."""

    manifest: DatasetManifest
    state_path: Path
    labels_dir: Path
    configs: dict[int, SpeciesConfig] = field(default_factory=dict)
    accepted: dict[int, dict] = field(default_factory=dict)  # image index -> record
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @classmethod
    def open(cls, root: str | os.PathLike, state_path: str | os.PathLike,
             labels_dir: str | os.PathLike | None = None) -> "Session":
        manifest = ingest_dibas(root)
        state_path = Path(state_path)
        if labels_dir is None:
            labels_dir = state_path.parent / "labels"
        session = cls(manifest=manifest, state_path=state_path, labels_dir=Path(labels_dir))
        if state_path.exists():
            session._restore(json.loads(state_path.read_text()))
        return session

    def _restore(self, doc: dict) -> None:
        names_to_id = {name: sid for sid, name in self.manifest.species().items()}
        for name, cfg in doc.get("configs", {}).items():
            if name in names_to_id:
                sid = names_to_id[name]
                self.configs[sid] = SpeciesConfig.from_dict(cfg, species_id=sid)
        for key, record in doc.get("accepted", {}).items():
            idx = int(key)
            if 0 <= idx < len(self.manifest.entries) and Path(record["label_path"]).exists():
                self.accepted[idx] = record

    def persist(self) -> None:
        names = self.manifest.species()
        doc = {"schema_version": CONFIG_SCHEMA_VERSION,
               "root": self.manifest.root,
               "configs": {names[sid]: cfg.to_dict()
                           for sid, cfg in sorted(self.configs.items())},
               "accepted": {str(idx): rec for idx, rec in sorted(self.accepted.items())}}
        payload = json.dumps(doc, indent=2) + "\n"
        self.state_path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.state_path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(payload)
            os.replace(tmp, self.state_path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)

    # --- pure reads ---

    def entry(self, image_id: int):
        if not 0 <= image_id < len(self.manifest.entries):
            raise UnknownImageError(image_id)
        return self.manifest.entries[image_id]

    def image(self, image_id: int) -> RasterImage:
        entry = self.entry(image_id)
        return load_image(Path(self.manifest.root) / entry.image_path)

    def config_for(self, species_id: int) -> SpeciesConfig:
        if species_id not in self.manifest.species():
            raise UnknownSpeciesError(species_id)
        if species_id in self.configs:
            return self.configs[species_id]
        return SpeciesConfig(species_id=species_id)

    def progress(self) -> dict:
        per_species = []
        for sid, name in self.manifest.species().items():
            ids = [i for i, e in enumerate(self.manifest.entries) if e.species_id == sid]
            done = sum(1 for i in ids if i in self.accepted)
            per_species.append({"species_id": sid, "name": name,
                                "accepted": done, "total": len(ids)})
        return {"species": per_species,
                "total_accepted": len(self.accepted),
                "total_images": len(self.manifest.entries)}

    def preview(self, image_id: int, cfg: SpeciesConfig) -> dict:
        """Same pure computation as annotate_image; stats carry the
        intermediate values an operator needs to judge k and kernel size."""
        img = self.image(image_id)
        entry = self.entry(image_id)
        mask, details = annotate_image_with_details(img, cfg)
        label_png = _label_png_bytes(mask, entry.species_id)
        over = overlay(img, mask, OVERLAY_COLOR, OVERLAY_ALPHA)
        stats = dict(details)
        stats["foreground_fraction"] = mask.foreground_fraction()
        stats["mask_sha256"] = hashlib.sha256(label_png).hexdigest()
        return {"mask_png_base64": base64.b64encode(label_png).decode("ascii"),
                "overlay_png_base64": base64.b64encode(
                    _downscaled_png_bytes(over, PREVIEW_MAX_DIM)).decode("ascii"),
                "stats": stats}

    # --- mutations, serialized through one lock ---

    def accept(self, image_id: int, cfg: SpeciesConfig) -> dict:
        img = self.image(image_id)
        entry = self.entry(image_id)
        mask = annotate_image(img, cfg)
        label_path = self.labels_dir / entry.species_name / (Path(entry.image_path).stem + ".png")
        with self._lock:
            save_label(mask_to_label(mask, entry.species_id), label_path)
            record = {"label_path": str(label_path), "config": cfg.to_dict(),
                      "species_id": entry.species_id}
            self.accepted[image_id] = record
            self.persist()
        return record

    def set_species_config(self, species_id: int, cfg: SpeciesConfig) -> None:
        if species_id not in self.manifest.species():
            raise UnknownSpeciesError(species_id)
        with self._lock:
            self.configs[species_id] = cfg
            self.persist()


def _label_png_bytes(mask: BinaryMask, species_id: int) -> bytes:
    label = mask_to_label(mask, species_id)
    buf = io.BytesIO()
    Image.fromarray(label.classes, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def _downscaled_png_bytes(img: RasterImage, max_dim: int) -> bytes:
    pil = Image.fromarray(img.pixels)
    if max(pil.size) > max_dim:
        scale = max_dim / max(pil.size)
        pil = pil.resize((max(1, round(pil.width * scale)),
                          max(1, round(pil.height * scale))), Image.BILINEAR)
    buf = io.BytesIO()
    pil.save(buf, format="PNG")
    return buf.getvalue()


def _png_bytes(img: RasterImage) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(img.pixels).save(buf, format="PNG")
    return buf.getvalue()


def _parse_config(body: dict, species_id: int) -> SpeciesConfig:
    try:
        return SpeciesConfig.from_dict(body, species_id=species_id)
    except (ValueError, TypeError, KeyError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))


def create_app(session: Session, static_dir: str | os.PathLike | None = None) -> FastAPI:
    app = FastAPI(title="bactoseg review service")

    @app.get("/api/v1/species")
    def list_species():
        progress = {p["species_id"]: p for p in session.progress()["species"]}
        out = []
        for sid, name in session.manifest.species().items():
            item = dict(progress[sid])
            item["config"] = session.config_for(sid).to_dict()
            out.append(item)
        return out

    @app.get("/api/v1/species/{species_id}/images")
    def list_images(species_id: int):
        if species_id not in session.manifest.species():
            raise HTTPException(status_code=404, detail=f"unknown species {species_id}")
        return [{"image_id": i, "path": e.image_path, "split": e.split,
                 "accepted": i in session.accepted}
                for i, e in enumerate(session.manifest.entries)
                if e.species_id == species_id]

    @app.get("/api/v1/images/{image_id}")
    def get_image(image_id: int):
        try:
            img = session.image(image_id)
        except UnknownImageError:
            raise HTTPException(status_code=404, detail=f"unknown image {image_id}")
        return Response(content=_png_bytes(img), media_type="image/png")

    @app.post("/api/v1/preview")
    def preview(body: dict):
        image_id = _require_image_id(body)
        entry = session.entry(image_id)
        cfg = _parse_config(body.get("config", {}), entry.species_id)
        return session.preview(image_id, cfg)

    @app.post("/api/v1/accept")
    def accept(body: dict):
        image_id = _require_image_id(body)
        entry = session.entry(image_id)
        cfg = _parse_config(body.get("config", {}), entry.species_id)
        return session.accept(image_id, cfg)

    @app.put("/api/v1/configs/{species_id}")
    def put_config(species_id: int, body: dict):
        if species_id not in session.manifest.species():
            raise HTTPException(status_code=404, detail=f"unknown species {species_id}")
        cfg = _parse_config(body, species_id)
        session.set_species_config(species_id, cfg)
        return {"species_id": species_id, "config": cfg.to_dict()}

    @app.get("/api/v1/progress")
    def progress():
        return session.progress()

    def _require_image_id(body: dict) -> int:
        if "image_id" not in body:
            raise HTTPException(status_code=422, detail="image_id required")
        image_id = int(body["image_id"])
        if not 0 <= image_id < len(session.manifest.entries):
            raise HTTPException(status_code=404, detail=f"unknown image {image_id}")
        return image_id

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def serve(root: str | os.PathLike, state_path: str | os.PathLike, port: int | None = None,
          labels_dir: str | os.PathLike | None = None,
          static_dir: str | os.PathLike | None = None) -> None:
    """Run the review service; the port may be overridden by $BACTOSEG_PORT."""
    import uvicorn

    if port is None:
        port = int(os.environ.get(PORT_ENV_VAR, "8000"))
    session = Session.open(root, state_path, labels_dir=labels_dir)
    app = create_app(session, static_dir=static_dir)
    uvicorn.run(app, host="127.0.0.1", port=port)
