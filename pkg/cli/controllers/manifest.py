from datetime import datetime, timezone
from pathlib import Path
from typing import List

from cli.models.results import RunManifest
from core.exceptions import ArtifactError
from core.storage import missing_artifacts, write_json

MANIFEST_NAME = "manifest.json"


def now() -> datetime:
    return datetime.now(timezone.utc)


def finish_manifest(manifest: RunManifest, out_dir: Path, artifacts: List[Path]) -> Path:
    """
    Stamp the end time, list the artifacts and write manifest.json.

    Raises:
        ArtifactError: a listed artifact is missing or empty
    """
    missing = missing_artifacts(artifacts)
    if missing:
        raise ArtifactError(f"run finished without these artifacts: {', '.join(missing)}")
    path = Path(out_dir) / MANIFEST_NAME
    manifest.finished_at = now()
    manifest.artifacts = [str(p) for p in artifacts] + [str(path)]
    return write_json(path, _json_ready(manifest))


def _json_ready(manifest: RunManifest) -> dict:
    payload = manifest.dict()
    payload["started_at"] = manifest.started_at.isoformat()
    payload["finished_at"] = manifest.finished_at.isoformat() if manifest.finished_at else None
    return payload
