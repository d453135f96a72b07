"""Independent oracles and builders shared by unit and integration tests."""
from collections import deque
from pathlib import Path
from typing import Dict, List, Tuple
import cmath
import math

import numpy as np
from PIL import Image

GLCM_OFFSETS = [(0, 1), (1, 1), (1, 0), (1, -1)]


def count_blocks(p: np.ndarray) -> int:
    """Flood-fill count of 4-connected equal-value regions."""
    rows, cols = p.shape
    seen = np.zeros(p.shape, dtype=bool)
    blocks = 0
    for i in range(rows):
        for j in range(cols):
            if seen[i, j]:
                continue
            blocks += 1
            seen[i, j] = True
            queue = deque([(i, j)])
            while queue:
                a, b = queue.popleft()
                for da, db in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    na, nb = a + da, b + db
                    if 0 <= na < rows and 0 <= nb < cols and not seen[na, nb] and p[na, nb] == p[a, b]:
                        seen[na, nb] = True
                        queue.append((na, nb))
    return blocks


def stencil_total_gradient(p: np.ndarray) -> float:
    """sum |Gx| + |Gy| with central differences inside and one-sided differences on the border."""
    p = p.astype(float)
    r = p.shape[0]
    total = 0.0
    for i in range(r):
        for j in range(r):
            if j == 0:
                gx = p[i, 1] - p[i, 0]
            elif j == r - 1:
                gx = p[i, r - 1] - p[i, r - 2]
            else:
                gx = (p[i, j + 1] - p[i, j - 1]) / 2
            if i == 0:
                gy = p[1, j] - p[0, j]
            elif i == r - 1:
                gy = p[r - 1, j] - p[r - 2, j]
            else:
                gy = (p[i + 1, j] - p[i - 1, j]) / 2
            total += abs(gx) + abs(gy)
    return total


def direct_dft_peak(p: np.ndarray, pad: int, rtol: float = 1e-9) -> Tuple[int, int]:
    """Peak bin of the zero-padded DFT over u, v in 0..pad/2, evaluated term by term."""
    r = p.shape[0]
    half = pad // 2
    magnitude = np.zeros((half + 1, half + 1))
    for u in range(half + 1):
        for v in range(half + 1):
            acc = 0j
            for i in range(r):
                for j in range(r):
                    acc += p[i, j] * cmath.exp(-2j * math.pi * (u * i + v * j) / pad)
            magnitude[u, v] = abs(acc)
    top = magnitude.max()
    ties = [
        (u, v)
        for u in range(half + 1)
        for v in range(half + 1)
        if magnitude[u, v] >= top * (1 - rtol)
    ]
    return min(ties, key=lambda uv: (uv[0] ** 2 + uv[1] ** 2, uv[0], uv[1]))


def glcm_counts(p01: np.ndarray, offset: Tuple[int, int]) -> np.ndarray:
    """Symmetric 2-level co-occurrence counts for one pixel offset."""
    counts = np.zeros((2, 2), dtype=int)
    rows, cols = p01.shape
    di, dj = offset
    for i in range(rows):
        for j in range(cols):
            ni, nj = i + di, j + dj
            if 0 <= ni < rows and 0 <= nj < cols:
                a, b = int(p01[i, j]), int(p01[ni, nj])
                counts[a, b] += 1
                counts[b, a] += 1
    return counts


def inertia_oracle(p: np.ndarray) -> float:
    """Mean inertia over the four offsets; the two levels sit at bins 1 and r."""
    r = p.shape[0]
    bins = [1, r]
    p01 = (p > 0).astype(int)
    values = []
    for offset in GLCM_OFFSETS:
        counts = glcm_counts(p01, offset)
        inertia = sum(
            (bins[a] - bins[b]) ** 2 * counts[a, b] for a in range(2) for b in range(2)
        ) / counts.sum()
        values.append(inertia)
    return sum(values) / len(values)


def ssim_oracle(ref: np.ndarray, test: np.ndarray) -> Dict[str, float]:
    """Global SSIM written out term by term with population statistics."""
    x = [float(v) for v in np.ravel(ref)]
    y = [float(v) for v in np.ravel(test)]
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sx = math.sqrt(sum((a - mx) ** 2 for a in x) / n)
    sy = math.sqrt(sum((b - my) ** 2 for b in y) / n)
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y)) / n
    c1, c2 = 2.55 ** 2, 7.65 ** 2
    c3 = c2 / 2
    l = (2 * mx * my + c1) / (mx ** 2 + my ** 2 + c1)
    c = (2 * sx * sy + c2) / (sx ** 2 + sy ** 2 + c2)
    s = (sxy + c3) / (sx * sy + c3)
    return {"ssim": l * c * s, "luminance": l, "contrast": c, "structure": s}


def psnr_oracle(ref: np.ndarray, test: np.ndarray) -> float:
    diff = np.asarray(ref, float) - np.asarray(test, float)
    mse = sum(float(d) ** 2 for d in diff.ravel()) / diff.size
    return math.inf if mse == 0 else 10 * math.log10(255 ** 2 / mse)


def square_phantom(side: int = 32, square: int = 12, low: float = 32.0, high: float = 224.0) -> np.ndarray:
    """Piecewise-constant phantom: a centered bright square on a dark background."""
    img = np.full((side, side), low)
    start = (side - square) // 2
    img[start:start + square, start:start + square] = high
    return img


def random_pm1(rng: np.random.Generator, side: int) -> np.ndarray:
    return np.where(rng.random((side, side)) < 0.5, -1, 1).astype(np.int8)


def write_png(path: Path, pixels: np.ndarray) -> Path:
    Image.fromarray(np.asarray(pixels)).save(path, format="PNG")
    return path


def write_grid_config(path: Path, **entries) -> Path:
    """KEY=VALUE grid document; list values are joined with commas."""
    lines: List[str] = []
    for key, value in entries.items():
        if isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        lines.append(f"{key.upper()}={value}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
