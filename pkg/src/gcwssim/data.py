"""Image datasets: loading, saving, subsetting and synthetic generation.

Images are grayscale rasters with intensities in [0, 1]. Datasets keep a
deterministic order (sorted by class, then by natural filename order) so
that distance matrices and neighbor graphs are reproducible across runs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

MIN_IMAGE_SIDE = 16

_LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])
_SUPPORTED_EXTENSIONS = {".png", ".pgm", ".ppm", ".pbm", ".bmp"}
_COIL_NAME = re.compile(r"^obj(\d+)__(\d+)\.([a-z0-9]+)$", re.IGNORECASE)


class DataError(Exception):
    """Unusable input data: missing files, bad formats, inconsistent sizes."""


@dataclass(frozen=True)
class GrayImage:
    """A 2D grayscale raster, row-major, intensities in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2:
            raise DataError(f"expected a 2D pixel grid, got shape {px.shape}")
        if min(px.shape) < MIN_IMAGE_SIDE:
            raise DataError(
                f"image {px.shape[1]}x{px.shape[0]} is smaller than "
                f"{MIN_IMAGE_SIDE}x{MIN_IMAGE_SIDE}"
            )
        if not np.isfinite(px).all() or px.min() < 0.0 or px.max() > 1.0:
            raise DataError("pixel intensities must be finite and within [0, 1]")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class LabeledDataset:
    """Ordered image collection with contiguous integer class labels.

    ``label_names[labels[i]]`` recovers the original class identifier of
    image ``i`` (e.g. the COIL object number or a manifest label string).
    """

    images: tuple[GrayImage, ...]
    labels: np.ndarray
    names: tuple[str, ...]
    label_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        n = len(self.images)
        if n < 2:
            raise DataError("a dataset needs at least 2 images")
        if not (len(labels) == len(self.names) == n):
            raise DataError("images, labels and names must have equal length")
        shapes = {img.pixels.shape for img in self.images}
        if len(shapes) > 1:
            raise DataError(f"mixed image sizes in dataset: {sorted(shapes)}")
        n_classes = len(self.label_names)
        if n_classes == 0 or sorted(set(labels.tolist())) != list(range(n_classes)):
            raise DataError("labels must be contiguous indices into label_names")

    def __len__(self) -> int:
        return len(self.images)

    @property
    def n_classes(self) -> int:
        return len(self.label_names)

    @property
    def image_shape(self) -> tuple[int, int]:
        return self.images[0].pixels.shape

    def stacked_pixels(self) -> np.ndarray:
        """All images as one (n, height, width) array."""
        return np.stack([img.pixels for img in self.images])


def _natural_key(text: str) -> tuple:
    """Sort key treating digit runs numerically: obj2 < obj10."""
    parts = re.split(r"(\d+)", str(text))
    return tuple((0, int(p)) if p.isdigit() else (1, p) for p in parts if p)


def _to_gray(arr: np.ndarray, mode: str, path: Path) -> np.ndarray:
    if mode in ("L", "P"):
        return arr.astype(np.float64) / 255.0
    if mode in ("I", "I;16"):
        return arr.astype(np.float64) / 65535.0
    if mode in ("RGB", "RGBA"):
        rgb = arr[..., :3].astype(np.float64)
        return rgb @ _LUMA_WEIGHTS / 255.0
    if mode == "1":
        return arr.astype(np.float64)
    raise DataError(f"unsupported image mode {mode!r} in {path}")


def load_image(path) -> GrayImage:
    """Load a raster file (PNG/PGM/PPM/BMP) as a [0, 1] grayscale image.

    Color inputs are reduced to luminance with weights 0.299/0.587/0.114.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such image file: {path}")
    try:
        with Image.open(path) as im:
            if im.mode == "P":
                im = im.convert("RGB")
            arr = np.asarray(im)
            mode = im.mode
    except UnidentifiedImageError as exc:
        raise DataError(f"cannot decode {path}: {exc}") from exc
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    gray = np.clip(_to_gray(arr, mode, path), 0.0, 1.0)
    try:
        return GrayImage(gray)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from exc


def save_image(img: GrayImage, path) -> None:
    """Write an image as binary PGM (default) or PNG, 8-bit quantized."""
    path = Path(path)
    quant = np.round(img.pixels * 255.0).astype(np.uint8)
    if path.suffix.lower() == ".png":
        Image.fromarray(quant, mode="L").save(path)
        return
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (img.width, img.height))
        fh.write(quant.tobytes())


def _read_manifest(root: Path, manifest: Path) -> list[tuple[str, str]]:
    entries = []
    for lineno, raw in enumerate(manifest.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "," not in line:
            raise DataError(f"{manifest}:{lineno}: expected 'relative_path,label'")
        rel, label = (part.strip() for part in line.split(",", 1))
        if not (root / rel).is_file():
            raise DataError(f"{manifest}:{lineno}: missing file {root / rel}")
        entries.append((rel, label))
    if not entries:
        raise DataError(f"manifest {manifest} lists no images")
    return entries


def _scan_layout(root: Path) -> list[tuple[str, str]]:
    """Discover (relative_path, label) pairs from a COIL-style flat layout
    or a one-subdirectory-per-class layout."""
    coil = []
    for p in sorted(root.iterdir()):
        if p.is_file():
            m = _COIL_NAME.match(p.name)
            if m and "." + m.group(3).lower() in _SUPPORTED_EXTENSIONS:
                coil.append((p.name, m.group(1)))
    if coil:
        return coil
    nested = []
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        for f in sorted(sub.iterdir()):
            if f.is_file() and f.suffix.lower() in _SUPPORTED_EXTENSIONS:
                nested.append((f"{sub.name}/{f.name}", sub.name))
    if nested:
        return nested
    raise DataError(
        f"{root}: no manifest given and no COIL-style (obj<N>__<angle>.*) or "
        "per-class-subdirectory images found"
    )


def load_dataset(root, manifest=None) -> LabeledDataset:
    """Load a directory of images into a dataset with contiguous labels.

    With ``manifest``, rows of ``relative_path,label`` define membership;
    otherwise the directory layout is auto-detected. Images are ordered by
    (class, natural filename order) and labels re-indexed from 0.
    """
    root = Path(root)
    if not root.is_dir():
        raise DataError(f"no such dataset directory: {root}")
    if manifest is not None:
        entries = _read_manifest(root, Path(manifest))
    else:
        entries = _scan_layout(root)

    class_names = sorted({label for _, label in entries}, key=_natural_key)
    index_of = {name: i for i, name in enumerate(class_names)}
    entries.sort(key=lambda e: (index_of[e[1]], _natural_key(e[0])))

    images = tuple(load_image(root / rel) for rel, _ in entries)
    labels = np.array([index_of[label] for _, label in entries], dtype=np.int64)
    names = tuple(rel for rel, _ in entries)
    return LabeledDataset(images, labels, names, tuple(class_names))


def subset_by_labels(ds: LabeledDataset, keep) -> LabeledDataset:
    """Restrict a dataset to the classes listed in ``keep``.

    Entries of ``keep`` are matched against the original class identifiers
    (``label_names``), exactly as strings or, failing that, by their numeric
    part, so COIL object numbers select ``obj<N>`` classes and Olivetti
    subject numbers select ``s<N>`` directories.
    """
    keep = list(keep)
    if not keep:
        raise DataError("keep must list at least one class")

    def numeric(name: str):
        digits = re.sub(r"\D", "", name)
        return int(digits) if digits else None

    by_name = {name: i for i, name in enumerate(ds.label_names)}
    by_number = {}
    for i, name in enumerate(ds.label_names):
        num = numeric(name)
        if num is not None and num not in by_number:
            by_number[num] = i

    selected = []
    for entry in keep:
        if str(entry) in by_name:
            selected.append(by_name[str(entry)])
        elif isinstance(entry, int) and entry in by_number:
            selected.append(by_number[entry])
        elif str(entry).isdigit() and int(entry) in by_number:
            selected.append(by_number[int(entry)])
        else:
            raise DataError(f"unknown class {entry!r}; have {list(ds.label_names)}")

    old_order = sorted(set(selected))
    remap = {old: new for new, old in enumerate(old_order)}
    mask = np.isin(ds.labels, old_order)
    idx = np.flatnonzero(mask)
    return LabeledDataset(
        images=tuple(ds.images[i] for i in idx),
        labels=np.array([remap[ds.labels[i]] for i in idx], dtype=np.int64),
        names=tuple(ds.names[i] for i in idx),
        label_names=tuple(ds.label_names[i] for i in old_order),
    )


def _fourfold(field: np.ndarray) -> np.ndarray:
    """Average a square field with its three 90-degree rotations (exact)."""
    return (field + np.rot90(field, 1) + np.rot90(field, 2) + np.rot90(field, 3)) / 4.0


def _render_blob(rng: np.random.Generator, size: int, wavelength: float) -> np.ndarray:
    """Seeded textured blob on a mid-gray background.

    The rendering mimics what makes turntable photos of rigid objects
    clusterable: band-pass texture at an object-specific wavelength (a small
    rotation then acts as a near-uniform local translation, which phase-based
    similarity tolerates far better than pixel-space L2), rotation-invariant
    identity channels (radial rings and angular spokes, so views of different
    objects stay far apart at every rotation) and exact 4-fold symmetry
    (views 90 degrees apart coincide, like the stable silhouettes of real
    turntable objects, keeping each object's view manifold compact). The
    soft silhouette avoids a sharp rim whose rotation would dominate
    adjacent-view distances. Content stays inside the inscribed circle so
    rotated frames never clip.
    """
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    center = (size - 1) / 2.0
    radius = np.hypot(yy - center, xx - center)
    theta = np.arctan2(yy - center, xx - center)

    sigma = wavelength / 4.5
    noise = rng.standard_normal((size, size))
    band = _fourfold(
        ndimage.gaussian_filter(noise, sigma) - ndimage.gaussian_filter(noise, 2.0 * sigma)
    )
    coarse = _fourfold(ndimage.gaussian_filter(rng.standard_normal((size, size)), size / 5.0))
    texture = 0.22 * band / max(band.std(), 1e-12)
    texture += 0.06 * coarse / max(coarse.std(), 1e-12)

    rings = np.zeros_like(radius)
    for _ in range(3):
        period = rng.uniform(6.0, 14.0) * size / 64.0
        rings += rng.uniform(0.4, 1.0) * np.cos(2.0 * np.pi * radius / period + rng.uniform(0.0, 2.0 * np.pi))
    texture += 0.12 * rings / max(rings.std(), 1e-12)

    # Angular spokes, 4-fold harmonics only; each harmonic fades in at the
    # radius where its arc wavelength reaches ~6 px (no aliasing near center).
    spokes = np.zeros_like(radius)
    for harmonic in (4, 8, 12, 16):
        start = (6.0 * harmonic / (2.0 * np.pi)) * size / 64.0
        ramp = np.clip((radius - start) / 4.0, 0.0, 1.0)
        spokes += rng.uniform(0.3, 1.0) * np.cos(harmonic * theta + rng.uniform(0.0, 2.0 * np.pi)) * ramp
    texture += 0.15 * spokes / max(spokes.std(), 1e-12)

    base_radius = 0.38 * size
    boundary = base_radius * (
        1.0
        + rng.uniform(-0.06, 0.06) * np.cos(4.0 * theta + rng.uniform(0.0, 2.0 * np.pi))
        + rng.uniform(-0.04, 0.04) * np.cos(8.0 * theta + rng.uniform(0.0, 2.0 * np.pi))
    )
    weight = np.clip((boundary - radius) / 5.0 + 0.5, 0.0, 1.0)
    weight = weight * weight * (3.0 - 2.0 * weight)
    return 0.5 + weight * (np.clip(0.5 + texture, 0.05, 0.95) - 0.5)


def rotate_image(img: GrayImage, degrees: float) -> GrayImage:
    """Rotate about the image center (bilinear, mid-gray fill)."""
    rotated = ndimage.rotate(
        img.pixels, degrees, reshape=False, order=1, mode="constant", cval=0.5
    )
    return GrayImage(np.clip(rotated, 0.0, 1.0))


def synth_rotated_set(
    n_objects: int, n_angles: int, size: int = 128, seed: int = 0
) -> LabeledDataset:
    """Generate rotated views of seeded random textured blobs.

    Each object contributes ``n_angles`` in-plane rotations at equal steps
    of 360/n_angles degrees; frame 0 is the unrotated rendering. The result
    is bit-identical for a fixed seed.
    """
    if n_objects < 1:
        raise DataError("n_objects must be >= 1")
    if n_angles < 2:
        raise DataError("n_angles must be >= 2")
    if size < 32:
        raise DataError("size must be >= 32")

    step = 360.0 / n_angles
    images, labels, names = [], [], []
    # Texture wavelengths follow a geometric ladder across objects (plus a
    # small jitter) so every object has a distinct dominant scale.
    ratios = np.linspace(0.0, 1.0, n_objects) if n_objects > 1 else np.array([0.5])
    for obj, child in enumerate(np.random.SeedSequence(seed).spawn(n_objects)):
        rng = np.random.default_rng(child)
        wavelength = (size / 5.5) * ((5.5 / 4.0) ** ratios[obj]) * rng.uniform(0.97, 1.03)
        base = GrayImage(_render_blob(rng, size, wavelength))
        for i in range(n_angles):
            frame = base if i == 0 else rotate_image(base, step * i)
            images.append(frame)
            labels.append(obj)
            names.append(f"synth/obj{obj + 1}__{int(i * step) if n_angles <= 360 else i}")
    return LabeledDataset(
        images=tuple(images),
        labels=np.array(labels, dtype=np.int64),
        names=tuple(names),
        label_names=tuple(str(obj + 1) for obj in range(n_objects)),
    )


def save_dataset(ds: LabeledDataset, out_dir) -> None:
    """Write a dataset as COIL-convention PGM files (loadable by load_dataset)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    per_label = {}
    for img, label, name in zip(ds.images, ds.labels, ds.names):
        tag = Path(name).name
        m = _COIL_NAME.match(tag if "." in tag else tag + ".pgm")
        if m:
            filename = f"obj{m.group(1)}__{m.group(2)}.pgm"
        else:
            ordinal = per_label.get(int(label), 0)
            per_label[int(label)] = ordinal + 1
            filename = f"obj{int(label) + 1}__{ordinal}.pgm"
        save_image(img, out / filename)
