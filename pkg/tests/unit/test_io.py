"""Unit tests for tensor and vector files."""
import numpy as np
import pytest

from tze_dynsys.errors import InvalidArgumentError, TensorFormatError
from tze_dynsys.io import (
    format_tensor,
    parse_tensor,
    read_tensor,
    read_vector,
    write_tensor,
    write_vector,
)
from tze_dynsys.tensor import make_random_symmetric

pytestmark = pytest.mark.unit


class TestTenzFormat:
    """Test the tenz v1 reader and writer."""

    def test_file_reproduces_tensor(self, tensor_file, kolda_mayo):
        """A written file reads back to the same entries."""
        assert read_tensor(tensor_file) == kolda_mayo

    def test_order_four(self, tmp_path):
        """Higher orders use the same layout."""
        tensor = make_random_symmetric(3, 4, seed=5)
        path = tmp_path / "t4.tenz"
        write_tensor(tensor, path)
        assert read_tensor(path) == tensor

    def test_header_layout(self, kolda_mayo):
        """Header lines come first, then one row per line."""
        lines = format_tensor(kolda_mayo).splitlines()
        assert lines[0] == "tenz v1"
        assert lines[1] == "order 3 dim 3"
        assert lines[2] == "dense"
        assert len(lines) == 3 + 9

    def test_values_may_span_lines(self):
        """Values are whitespace separated regardless of line breaks."""
        text = "tenz v1\norder 3 dim 2\ndense\n0 1 2\n3 4\n5 6 7\n"
        tensor = parse_tensor(text)
        assert tensor[1, 1, 1] == 7.0

    @pytest.mark.parametrize(
        "text",
        [
            "tenz v2\norder 3 dim 2\ndense\n" + "0 " * 8,
            "tenz v1\norder 3\ndense\n" + "0 " * 8,
            "tenz v1\norder 2 dim 2\ndense\n" + "0 " * 4,
            "tenz v1\norder 3 dim 2\nsparse\n" + "0 " * 8,
            "tenz v1\norder 3 dim 2\ndense\n" + "0 " * 7,
            "tenz v1\norder 3 dim 2\ndense\n" + "0 " * 7 + "nan",
            "tenz v1\norder 3 dim 2\ndense\n" + "0 " * 7 + "abc",
            "tenz v1\norder x dim 2\ndense\n" + "0 " * 8,
        ],
    )
    def test_malformed(self, text):
        """Malformed files raise a format error."""
        with pytest.raises(TensorFormatError):
            parse_tensor(text)

    def test_format_error_is_invalid_argument(self):
        """Format errors are input errors for the CLI."""
        assert issubclass(TensorFormatError, InvalidArgumentError)

    def test_missing_file(self, tmp_path):
        """Unreadable paths raise a format error."""
        with pytest.raises(TensorFormatError):
            read_tensor(tmp_path / "missing.tenz")


class TestVectorFiles:
    """Test plain vector files."""

    def test_write_and_read(self, tmp_path):
        """One value per line, read back exactly."""
        path = tmp_path / "x.txt"
        x = np.array([0.25, -1.5, 3.0])
        write_vector(x, path)
        np.testing.assert_array_equal(read_vector(path), x)

    def test_empty_vector(self, tmp_path):
        """An empty file is not a vector."""
        path = tmp_path / "empty.txt"
        path.write_text("\n")
        with pytest.raises(TensorFormatError):
            read_vector(path)
