import numpy as np
import pytest

from advoverlay.errors import ShapeError
from advoverlay.image import ImageTensor, letterbox, load_image, save_png


def test_rejects_out_of_range():
    with pytest.raises(ValueError):
        ImageTensor(np.full((4, 4, 3), 1.5))
    with pytest.raises(ValueError):
        ImageTensor(np.full((4, 4, 3), -0.1))


def test_rejects_bad_channels():
    with pytest.raises(ShapeError):
        ImageTensor(np.zeros((4, 4, 2)))
    with pytest.raises(ShapeError):
        ImageTensor(np.zeros((4, 4)))


def test_from_array_clip():
    img = ImageTensor.from_array(np.full((2, 2, 3), 1.7), clip=True)
    assert float(img.data.max()) == 1.0


def test_png_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    arr = np.rint(rng.uniform(0, 1, (9, 7, 3)) * 255) / 255.0
    img = ImageTensor(arr)
    path = tmp_path / "x.png"
    save_png(img, path)
    back = load_image(path)
    assert back.height == 9 and back.width == 7 and back.channels == 3
    assert np.allclose(back.data, arr, atol=1e-9)


def test_letterbox_square_resizes():
    img = ImageTensor.full(64, 64, 0.25)
    out = letterbox(img, 32)
    assert out.height == out.width == 32
    assert np.allclose(out.data, 0.25)


def test_letterbox_pads_with_gray():
    img = ImageTensor.full(32, 64, 0.0)  # 1:2 aspect
    out = letterbox(img, 64)
    assert out.height == out.width == 64
    # scaled content occupies rows 16..48, padding is exactly 0.5
    assert np.allclose(out.data[:16], 0.5)
    assert np.allclose(out.data[48:], 0.5)
    assert np.allclose(out.data[16:48], 0.0)
