import numpy as np
import pytest

from gcwssim.data import DataError
from gcwssim.manifold import DistanceMatrix, MatrixKind
from gcwssim.matrixio import (
    heatmap_array,
    read_gdm,
    write_csv,
    write_gdm,
    write_gray,
)


def sample_matrix(n=5, kind=MatrixKind.GCWSSIM, seed=0):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(size=(n, 2))
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    return DistanceMatrix(d, kind)


class TestGdmFormat:
    @pytest.mark.parametrize("kind", list(MatrixKind))
    def test_round_trip(self, tmp_path, kind):
        m = sample_matrix(kind=kind)
        path = tmp_path / "m.gdm"
        write_gdm(m, path)
        back = read_gdm(path)
        assert back.kind is kind
        assert (back.values == m.values).all()

    def test_header_layout(self, tmp_path):
        m = sample_matrix(n=3, kind=MatrixKind.L2)
        path = tmp_path / "m.gdm"
        write_gdm(m, path)
        raw = path.read_bytes()
        assert raw[:4] == b"GDM1"
        assert int.from_bytes(raw[4:12], "little") == 3
        assert raw[12] == 0
        assert len(raw) == 13 + 3 * 3 * 8

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.gdm"
        path.write_bytes(b"NOPE" + bytes(100))
        with pytest.raises(DataError, match="GDM1"):
            read_gdm(path)

    def test_truncated(self, tmp_path):
        m = sample_matrix()
        path = tmp_path / "m.gdm"
        write_gdm(m, path)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(DataError, match="bytes"):
            read_gdm(path)

    def test_unknown_kind_tag(self, tmp_path):
        m = sample_matrix(n=2)
        path = tmp_path / "m.gdm"
        write_gdm(m, path)
        raw = bytearray(path.read_bytes())
        raw[12] = 9
        path.write_bytes(bytes(raw))
        with pytest.raises(DataError, match="kind"):
            read_gdm(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            read_gdm(tmp_path / "no.gdm")


class TestCsvExport:
    def test_values_round_trip(self, tmp_path):
        m = sample_matrix()
        path = tmp_path / "m.csv"
        write_csv(m, path)
        back = np.loadtxt(path, delimiter=",")
        assert (back == m.values).all()


class TestHeatmap:
    def test_normalization(self):
        m = sample_matrix()
        img = heatmap_array(m)
        assert img.dtype == np.uint8
        assert img.max() == 255
        assert (np.diagonal(img) == 0).all()

    def test_uniform_off_diagonal(self):
        values = np.full((4, 4), 0.5)
        np.fill_diagonal(values, 0.0)
        img = heatmap_array(DistanceMatrix(values, MatrixKind.L2))
        off = img[~np.eye(4, dtype=bool)]
        assert (off == 255).all()
        assert (np.diagonal(img) == 0).all()

    def test_scale_saturates(self):
        m = sample_matrix()
        img = heatmap_array(m, scale=50.0)
        off = img[~np.eye(m.n, dtype=bool)]
        assert (off == 255).mean() > 0.9  # nearly everything clamps to white

    def test_all_zero_rejected(self):
        m = DistanceMatrix(np.zeros((3, 3)), MatrixKind.L2)
        with pytest.raises(DataError, match="all-zero"):
            heatmap_array(m)

    def test_bad_scale(self):
        with pytest.raises(ValueError):
            heatmap_array(sample_matrix(), scale=0.0)


class TestWriteGray:
    def test_pgm_and_png(self, tmp_path):
        from PIL import Image
        rng = np.random.default_rng(1)
        pixels = rng.integers(0, 256, size=(9, 7), dtype=np.uint8)
        write_gray(pixels, tmp_path / "a.pgm")
        write_gray(pixels, tmp_path / "a.png")
        pgm = np.asarray(Image.open(tmp_path / "a.pgm"))
        png = np.asarray(Image.open(tmp_path / "a.png"))
        assert (pgm == pixels).all()
        assert (png == pixels).all()
