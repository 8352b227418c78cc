import xml.etree.ElementTree as ET

import numpy as np

from snnuq.datastructures.core import retention_curve
from snnuq.interfaces.plots import plot_retention_curves


def _curves():
    rng = np.random.default_rng(0)
    errors = rng.exponential(size=40)
    return {"ensemble": retention_curve(errors, rng.normal(size=40)),
            "oracle": retention_curve(errors, errors)}


def test_retention_svg_is_valid(tmp_path):
    path = str(tmp_path / "figures" / "retention.svg")
    plot_retention_curves(_curves(), path, title="dev_in")
    root = ET.parse(path).getroot()
    assert root.tag.endswith("svg")
    with open(path) as handle:
        text = handle.read()
    assert "R-AUC" in text
    assert "dev_in" in text


def test_retention_svg_is_reproducible(tmp_path):
    first = str(tmp_path / "a.svg")
    second = str(tmp_path / "b.svg")
    plot_retention_curves(_curves(), first)
    plot_retention_curves(_curves(), second)
    with open(first, "rb") as a, open(second, "rb") as b:
        assert a.read() == b.read()
