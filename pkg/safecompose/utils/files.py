import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Union

import numpy as np
from django.core.serializers.json import DjangoJSONEncoder


class NumpyJSONEncoder(DjangoJSONEncoder):
    """DjangoJSONEncoder that also understands numpy scalars and arrays"""

    def default(self, o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.bool_):
            return bool(o)
        return super().default(o)


def atomic_write(path: Union[str, Path], data: Union[str, bytes]):
    """Write to a temporary file in the same directory, then rename"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp_name = tempfile.mkstemp(dir=str(path.parent), prefix=".%s." % path.name)
    try:
        with os.fdopen(fd, mode) as handle:
            handle.write(data)
        os.replace(tmp_name, str(path))
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def dumps_json(obj: Any, **kwargs) -> str:
    return json.dumps(obj, cls=NumpyJSONEncoder, **kwargs)


def dump_json(path: Union[str, Path], obj: Any):
    atomic_write(path, dumps_json(obj, indent=2, sort_keys=True) + "\n")


def load_json(path: Union[str, Path]) -> Any:
    with open(path) as handle:
        return json.load(handle)


def digest(obj: Any) -> str:
    """SHA-256 of the canonical JSON form of ``obj``"""
    canonical = dumps_json(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
