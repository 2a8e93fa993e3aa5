import hashlib
import random
import string
from pathlib import Path
from typing import Iterable, Union

import numpy as np


def generate_id(length: int = 8) -> str:
    """Generate random ID"""
    return ''.join(random.choices(string.ascii_lowercase + string.digits, k=length))


def format_bytes(bytes_value: float) -> str:
    """Format bytes to human readable format"""
    for unit in ['B', 'KB', 'MB', 'GB', 'TB']:
        if bytes_value < 1024.0:
            return f"{bytes_value:.2f} {unit}"
        bytes_value /= 1024.0
    return f"{bytes_value:.2f} PB"


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for the stream identified by (seed, keys).

    The same (seed, keys) always yields the same stream, whatever thread or
    order it is requested from.
    """
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(sequence))


def derive_seed(seed: int, *keys: int) -> int:
    """64-bit integer seed for the stream identified by (seed, keys)"""
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def hash_array(values: np.ndarray) -> str:
    """sha256 of an array's dtype, shape and bytes"""
    array = np.ascontiguousarray(values)
    digest = hashlib.sha256()
    digest.update(str(array.dtype).encode())
    digest.update(str(array.shape).encode())
    digest.update(array.tobytes())
    return digest.hexdigest()


def hash_file(path: Union[str, Path], chunk_size: int = 1 << 20) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(chunk_size), b""):
            digest.update(chunk)
    return digest.hexdigest()


def safe_name(name: str, max_length: int = 64) -> str:
    """Filesystem-safe directory name"""
    return "".join(c if c.isalnum() or c in "._-" else "_" for c in name[:max_length])


def significance_stars(p_value: float, levels: Iterable[float] = (0.10, 0.05, 0.01)) -> int:
    """0/1/2/3 for none/10%/5%/1%"""
    if p_value is None or not np.isfinite(p_value):
        return 0
    return int(sum(p_value < level for level in levels))
