import numpy as np
import pytest

from advoverlay.detector.config import make_scale_config
from advoverlay.detector.decode import Detection
from advoverlay.detector.network import Detector, RawPrediction, init_detector

FIXTURES = __import__("pathlib").Path(__file__).parent / "fixtures"

TRAINED_WEIGHTS = FIXTURES / "toy_trained.advd"
CORPUS_DIR = FIXTURES / "corpus"
CALIBRATION = FIXTURES / "calibration.json"


def tiny_config(num_classes=2):
    """Single scale, 16x16 input, as small as the architecture allows."""
    return make_scale_config([(2, 8, [(6.0, 6.0)])], boxes_per_cell=1,
                             num_classes=num_classes)


def tiny_detector(seed=3, num_classes=2):
    return Detector(init_detector(tiny_config(num_classes), 16, seed=seed))


def random_image(rng, side=16, channels=3, lo=0.1, hi=0.9):
    from advoverlay.image import ImageTensor

    return ImageTensor(rng.uniform(lo, hi, (side, side, channels)))


def dummy_detection(i=0, score=1.0, class_id=1, x=1.0, y=1.0, w=2.0, h=2.0):
    return Detection(b_x=x, b_y=y, b_w=w, b_h=h, class_id=class_id,
                     objectness=score, class_prob=1.0, score=score, index=i)


class SumDetector:
    """Fake DetectorProtocol whose box count follows the image's pixel sum.

    loss_gradient is a constant +1 field, so every attack step raises masked
    pixels and therefore the count; useful as an always-succeeds rig.
    """

    def __init__(self, input_side=32, num_classes=2):
        self.input_side = input_side
        self.in_channels = 3
        self.num_classes = num_classes

    def predict(self, image):
        raise NotImplementedError

    def loss_gradient(self, image, loss):
        return 0.0, np.ones_like(image.data)

    def detect(self, image, conf_threshold=0.5, iou_threshold=0.45):
        # one attack step on a 16x16 mask raises the sum by ~6, so the
        # count strictly grows every iteration
        n = int(image.data.sum() / 2.0)
        return [dummy_detection(i) for i in range(n)]


@pytest.fixture(scope="session")
def trained_detector():
    from advoverlay.detector.weights_io import load_weights

    if not TRAINED_WEIGHTS.exists():
        pytest.skip("trained fixture missing; run scripts/build_fixtures.py")
    return Detector(load_weights(TRAINED_WEIGHTS))


def raw_from_logits(logits):
    return RawPrediction(scales=(np.asarray(logits, dtype=np.float64),))
