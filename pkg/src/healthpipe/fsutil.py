"""Atomic filesystem writes: no partially-written artifact is ever loadable."""

from __future__ import annotations

import os
import shutil
from pathlib import Path
from typing import Callable


def atomic_write_text(path: Path, text: str) -> None:
    """Write via a sibling temp file and rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + f".tmp-{os.getpid()}")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def atomic_replace_dir(target: Path, build: Callable[[Path], None]) -> None:
    """Populate a temp directory via ``build`` and swap it into place.

    Any existing directory at ``target`` is replaced wholesale; on failure the
    temp directory is removed and ``target`` is left untouched.
    """
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = target.with_name(target.name + f".tmp-{os.getpid()}")
    if tmp.exists():
        shutil.rmtree(tmp)
    tmp.mkdir()
    try:
        build(tmp)
        if target.exists():
            shutil.rmtree(target)
        os.replace(tmp, target)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
