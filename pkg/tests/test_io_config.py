import math

import numpy as np
import pytest

from dsii.lib.Errors import ConfigError, FormatError
from dsii.lib.config.RunConfig import RunConfig, eval_angle
from dsii.lib.grid.ComplexGrid import ComplexField, ComplexGrid, gaussian, make_grid
from dsii.lib.grid.DiskSpec import DiskSpec
from dsii.lib.io.DataFormats import read_data, read_manifest, read_sdat, write_data, write_manifest, write_sdat
from dsii.lib.io.FieldFormats import read_field, write_field
from tests.helpers import synthetic_data


@pytest.fixture
def field():
    q = gaussian(make_grid(3.0, 8), 0.5 - 0.25j, 1.2, 0.3j)
    return q.with_values(q.values + 1e-3j * q.grid.nodes)


@pytest.mark.parametrize("suffix", ["cfld", "csv"])
def test_field_files_preserve_values(tmp_path, field, suffix):
    path = write_field(tmp_path / f"q.{suffix}", field)
    restored = read_field(path)
    assert restored.grid.same_as(field.grid)
    np.testing.assert_array_equal(restored.values, field.values)


def test_cfld_bad_magic(tmp_path):
    path = tmp_path / "bad.cfld"
    path.write_bytes(b"NOTAFILE" + bytes(16))
    with pytest.raises(FormatError) as error:
        read_field(path)
    assert error.value.offset == 0


def test_cfld_truncated_payload(tmp_path, field):
    path = write_field(tmp_path / "q.cfld", field)
    path.write_bytes(path.read_bytes()[:-5])
    with pytest.raises(FormatError) as error:
        read_field(path)
    assert error.value.offset is not None


def test_csv_reports_line_number(tmp_path, field):
    path = write_field(tmp_path / "q.csv", field)
    lines = path.read_text().splitlines()
    lines[2] = "0.1,0.2,abc,0"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(FormatError) as error:
        read_field(path)
    assert error.value.line_number == 3


def test_csv_header_is_checked(tmp_path):
    path = tmp_path / "q.csv"
    path.write_text("a,b,c,d\n")
    with pytest.raises(FormatError) as error:
        read_field(path)
    assert error.value.line_number == 1


@pytest.mark.parametrize("suffix", ["cfld", "csv"])
def test_field_file_rejects_a_grid_that_is_not_a_power_of_two(tmp_path, suffix):
    grid = ComplexGrid(6, 3.0)
    path = write_field(tmp_path / f"q.{suffix}", ComplexField(grid, np.ones(grid.shape)))
    with pytest.raises(FormatError, match="power of two"):
        read_field(path)


def test_missing_field_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_field(tmp_path / "missing.cfld")


def test_sdat_file(tmp_path):
    block = np.arange(2 * 2 * 3 * 3).reshape(2, 2, 3, 3) * (1 - 0.5j)
    write_sdat(tmp_path / "b.sdat", block, 1.5, 0.25)
    restored, radius, t = read_sdat(tmp_path / "b.sdat")
    np.testing.assert_array_equal(restored, block)
    assert (radius, t) == (1.5, 0.25)


@pytest.mark.parametrize("fmt", ["cfld", "csv"])
def test_data_directory(tmp_path, small_kgrid, fmt):
    data = synthetic_data(small_kgrid, DiskSpec(1.0, 8), off_amplitude=0.1, block_amplitude=0.05)
    data.diag_mask[4, 5] = False
    write_data(tmp_path / "data", data, fmt)
    restored = read_data(tmp_path / "data")
    np.testing.assert_array_equal(restored.diag_mask, data.diag_mask)
    np.testing.assert_array_equal(restored.diag[:, :, data.diag_mask], data.diag[:, :, data.diag_mask])
    np.testing.assert_array_equal(restored.boundary_block, data.boundary_block)
    assert restored.disk.radius == 1.0 and restored.disk.n_boundary == 8


def test_data_directory_without_metadata(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_data(tmp_path)


def test_manifest(tmp_path):
    write_manifest(tmp_path, command="forward", verdicts={"symmetry": {"passed": True}})
    assert read_manifest(tmp_path)["verdicts"]["symmetry"]["passed"]
    (tmp_path / "manifest.json").write_text("{\n  broken")
    with pytest.raises(FormatError) as error:
        read_manifest(tmp_path)
    assert error.value.line_number == 2


def test_config_defaults():
    config = RunConfig()
    assert config["grid.n"] == 64
    assert config["disk.k0_angle"] == pytest.approx(-math.pi / 2)
    assert config.disk().is_empty
    assert config.kgrid().extent == 8.0


def test_config_parse():
    config = RunConfig.parse("# run\ngrid.n = 32\n\ndisk.radius = 1.5  # disk\ndisk.k0_angle = pi/4\n"
                             "sweep.a_list = 0.1, 0.2\ninverse.full_matrix = yes\n")
    assert config["grid.n"] == 32
    assert config["disk.radius"] == 1.5
    assert config["disk.k0_angle"] == pytest.approx(math.pi / 4)
    assert config["sweep.a_list"] == [0.1, 0.2]
    assert config["inverse.full_matrix"] is True


@pytest.mark.parametrize("text,line", [
    ("grid.n = 32\nunknown.key = 1\n", 2),
    ("grid.n = 32\n\ngrid.n = 48\n", 3),
    ("grid.extent = -1\n", 1),
    ("solver.mode = fast\n", 1),
    ("grid.n\n", 1),
    ("disk.radius = 20\nevolve.T_max = 1\n", 2),
])
def test_config_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError) as error:
        RunConfig.parse(text)
    assert error.value.line_number == line


def test_config_load_missing(tmp_path):
    with pytest.raises(FileNotFoundError):
        RunConfig.load(tmp_path / "run.cfg")


def test_fingerprint():
    first = RunConfig.parse("grid.n = 32\nthreads = 2\n")
    second = RunConfig.parse("threads = 2\n# comment\ngrid.n=32\n")
    assert first.fingerprint() == second.fingerprint()
    assert first.fingerprint() != RunConfig.parse("grid.n = 16\nthreads = 2\n").fingerprint()
    assert len(first.fingerprint()) == 64


def test_overrides_and_environment():
    config = RunConfig().with_overrides(threads=4, io_format="csv", disk_radius=None)
    assert config["threads"] == 4 and config["io.format"] == "csv"
    assert config["disk.radius"] == 0.0
    assert RunConfig().with_environment({"DSII_THREADS": "3"})["threads"] == 3
    with pytest.raises(ConfigError):
        RunConfig().with_environment({"DSII_THREADS": "zero"})


def test_exponent_budget():
    with pytest.raises(ConfigError):
        RunConfig({"disk.radius": 10.0, "evolve.T_max": 4.0})
    assert RunConfig({"disk.radius": 10.0, "evolve.T_max": 3.0})["evolve.T_max"] == 3.0


@pytest.mark.parametrize("text,value", [("pi", math.pi), ("-pi/2", -math.pi / 2), ("0.5pi", math.pi / 2),
                                        ("2*pi/3", 2 * math.pi / 3), ("1.25", 1.25)])
def test_eval_angle(text, value):
    assert eval_angle(text) == pytest.approx(value)
