"""
This module contains utility functions for working with files.
"""
from typing import Any, Dict, List
import hashlib
import json
import os

from identsuite.config.config import Config

MANIFEST_FILE = "manifest.json"


def output_dir(name: str, base_dir: str = None) -> str:
    """
    Returns (and creates) the directory base_dir/name. base_dir defaults
    to the IDENT_OUT_DIR setting.
    """
    settings = Config()
    path = os.path.join(base_dir or settings.OUT_DIR, name)
    os.makedirs(path, exist_ok=True)
    return path


def write_json(path: str, content: Any) -> str:
    """ Deterministic JSON: sorted keys, fixed indentation """
    with open(path, 'w', encoding='utf-8') as json_file:
        json.dump(content, json_file, sort_keys=True, indent=2)
        json_file.write('\n')
    return path


def read_json(path: str) -> Any:
    with open(path, encoding='utf-8') as json_file:
        return json.load(json_file)


def file_sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, 'rb') as content:
        for chunk in iter(lambda: content.read(65536), b''):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(bundle_dir: str, names: List[str],
                   header: Dict[str, Any]) -> str:
    """
    Writes manifest.json listing the named files of bundle_dir with their
    SHA-256, plus the header entries.
    """
    files = {name: file_sha256(os.path.join(bundle_dir, name))
             for name in sorted(names)}
    return write_json(os.path.join(bundle_dir, MANIFEST_FILE),
                      dict(header, files=files))


def verify_manifest(bundle_dir: str) -> List[str]:
    """
    Recomputes the hashes of a bundle.

    Returns:
        List[str]: the listed files missing or changed. Empty when the
            bundle matches its manifest.
    """
    manifest = read_json(os.path.join(bundle_dir, MANIFEST_FILE))
    listed = manifest.get("files", {})
    problems = []
    for name, expected in sorted(listed.items()):
        path = os.path.join(bundle_dir, name)
        if not os.path.isfile(path):
            problems.append(f'{name}: missing')
        elif file_sha256(path) != expected:
            problems.append(f'{name}: hash mismatch')
    return problems
