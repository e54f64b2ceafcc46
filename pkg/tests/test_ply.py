import numpy as np
import pytest

from orbitinspect.ply import ParseError, UnsupportedFormat, load_ply

MINIMAL = """\
ply
format ascii 1.0
element vertex 3
property float x
property float y
property float z
end_header
0.0 0.0 0.0
1.5 -2.0 0.25
-1.0 1.0 1.0
"""

WITH_EXTRAS = """\
ply
format ascii 1.0
comment exported fixture
element vertex 2
property float64 x
property float64 y
property float64 z
property float nx
property float ny
property float nz
element face 1
property list uchar int vertex_indices
end_header
1.0 2.0 3.0 0.0 0.0 1.0
4.0 5.0 6.0 0.0 1.0 0.0
3 0 1 0
"""


def write(tmp_path, text, name="cloud.ply"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadPly:
    def test_minimal(self, tmp_path):
        cloud = load_ply(write(tmp_path, MINIMAL))
        assert len(cloud) == 3
        np.testing.assert_allclose(cloud.points[1], [1.5, -2.0, 0.25])

    def test_normals_and_faces_ignored(self, tmp_path):
        cloud = load_ply(write(tmp_path, WITH_EXTRAS))
        assert len(cloud) == 2
        np.testing.assert_allclose(cloud.points, [[1, 2, 3], [4, 5, 6]])

    def test_missing_magic(self, tmp_path):
        with pytest.raises(ParseError) as err:
            load_ply(write(tmp_path, MINIMAL.replace("ply\n", "plz\n", 1)))
        assert err.value.line_no == 1

    def test_binary_rejected(self, tmp_path):
        text = MINIMAL.replace("format ascii 1.0", "format binary_little_endian 1.0")
        with pytest.raises(UnsupportedFormat):
            load_ply(write(tmp_path, text))

    def test_truncated_data(self, tmp_path):
        text = "\n".join(MINIMAL.splitlines()[:-1]) + "\n"
        with pytest.raises(ParseError):
            load_ply(write(tmp_path, text))

    def test_no_vertex_element(self, tmp_path):
        text = MINIMAL.replace("element vertex 3", "element voxel 3")
        with pytest.raises(ParseError):
            load_ply(write(tmp_path, text))

    def test_missing_axis_property(self, tmp_path):
        text = MINIMAL.replace("property float z\n", "")
        with pytest.raises(ParseError):
            load_ply(write(tmp_path, text))

    def test_non_numeric_coordinate(self, tmp_path):
        text = MINIMAL.replace("1.5 -2.0 0.25", "1.5 oops 0.25")
        with pytest.raises(ParseError):
            load_ply(write(tmp_path, text))

    def test_integer_vertex_type_rejected(self, tmp_path):
        text = MINIMAL.replace("property float x", "property int x")
        with pytest.raises(ParseError):
            load_ply(write(tmp_path, text))

    def test_source_recorded(self, tmp_path):
        path = write(tmp_path, MINIMAL)
        cloud = load_ply(path)
        assert cloud.meta["source"] == str(path)
