"""Grayscale conversion and resampling shared by image loading and the bundled scenes."""
import numpy as np
from PIL import Image
from skimage.transform import resize

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


def rgb_to_gray(rgb: np.ndarray) -> np.ndarray:
    """Reduce an (..., 3) array with the 0.299/0.587/0.114 luma weights."""
    return np.asarray(rgb, dtype=np.float64)[..., :3] @ LUMA_WEIGHTS


def pil_to_gray(img: Image.Image) -> np.ndarray:
    """Decoded Pillow image as float64 gray on the 0..255 scale."""
    mode = img.mode
    if mode in ("I;16", "I;16B", "I;16L", "I"):
        # 16-bit grayscale
        return np.asarray(img, dtype=np.float64) * (255.0 / 65535.0)
    if mode == "F":
        return np.asarray(img, dtype=np.float64)
    if mode in ("L", "1"):
        return np.asarray(img.convert("L"), dtype=np.float64)
    if mode == "LA":
        return np.asarray(img.getchannel("L"), dtype=np.float64)
    return rgb_to_gray(np.asarray(img.convert("RGB")))


def resample_square(gray: np.ndarray, side: int) -> np.ndarray:
    """Bilinear resize to side x side, edge-extended, without anti-aliasing, clamped to [0, 255]."""
    if gray.shape != (side, side):
        gray = resize(
            gray,
            (side, side),
            order=1,
            mode="edge",
            anti_aliasing=False,
            preserve_range=True,
        )
    return np.clip(gray, 0.0, 255.0)
