import struct

import numpy as np
import pytest

from gdnlslab.errors import ConsistencyError, SnapshotFormatError, SnapshotTruncatedError
from gdnlslab.exact import SolitonParams, soliton_field, soliton_grid
from gdnlslab.grid import Field, Grid1D
from gdnlslab.invariants import mass
from gdnlslab.io import (MAGIC, read_csv, read_snapshot, read_snapshot_with_header, write_csv,
                         write_snapshot)


def sample_field(rng, n=64):
    g = Grid1D(n, 12.5)
    return Field(g, 3.25, rng.normal(size=n) + 1j * rng.normal(size=n))


def test_round_trip_bit_exact(tmp_path, rng):
    f = sample_field(rng)
    path = write_snapshot(f, tmp_path / "a.gdnl", 1.5)
    g, head = read_snapshot_with_header(path)
    assert g.samples.tobytes() == f.samples.tobytes()
    assert g.grid == f.grid and g.time == f.time
    assert head.sigma == 1.5 and head.n == 64


def test_layout(tmp_path, rng):
    f = sample_field(rng, 16)
    data = write_snapshot(f, tmp_path / "a.gdnl", 2.0).read_bytes()
    assert len(data) == 40 + 16 * 16
    magic, version, n, length, t, sigma = struct.unpack_from("<4sIQddd", data)
    assert (magic, version, n, length, t, sigma) == (MAGIC, 1, 16, 12.5, 3.25, 2.0)
    re, im = struct.unpack_from("<dd", data, 40)
    assert (re, im) == (f.samples[0].real, f.samples[0].imag)


def test_truncated(tmp_path, rng):
    path = write_snapshot(sample_field(rng), tmp_path / "a.gdnl", 1.0)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(SnapshotTruncatedError):
        read_snapshot(path)
    path.write_bytes(b"GDNL")
    with pytest.raises(SnapshotTruncatedError):
        read_snapshot(path)


def test_bad_magic_and_version(tmp_path, rng):
    path = write_snapshot(sample_field(rng), tmp_path / "a.gdnl", 1.0)
    data = bytearray(path.read_bytes())
    path.write_bytes(b"XXXX" + bytes(data[4:]))
    with pytest.raises(SnapshotFormatError):
        read_snapshot(path)
    data[4:8] = struct.pack("<I", 9)
    path.write_bytes(bytes(data))
    with pytest.raises(SnapshotFormatError):
        read_snapshot(path)


def test_trailing_bytes(tmp_path, rng):
    path = write_snapshot(sample_field(rng), tmp_path / "a.gdnl", 1.0)
    path.write_bytes(path.read_bytes() + b"\0")
    with pytest.raises(SnapshotFormatError):
        read_snapshot(path)


def test_off_centre_grid_rejected(tmp_path):
    f = Field(Grid1D(16, 2.0, origin=0.0), 0.0, np.zeros(16))
    with pytest.raises(ConsistencyError):
        write_snapshot(f, tmp_path / "a.gdnl", 1.0)


def test_soliton_mass_to_the_bit(tmp_path):
    p = SolitonParams(1.0, 0.25, 0.0)
    f = soliton_field(p, soliton_grid(p))
    back = read_snapshot(write_snapshot(f, tmp_path / "s.gdnl", 1.0))
    assert mass(back) == mass(f)


def test_csv_round_trip(tmp_path):
    rows = [(0.1, 1, True), (1 / 3, 2, False)]
    path = write_csv(tmp_path / "t.csv", ["a", "b", "c"], rows)
    raw = path.read_bytes()
    assert raw.startswith(b"a,b,c\r\n")
    header, body = read_csv(path)
    assert header == ["a", "b", "c"]
    assert float(body[1][0]) == 1 / 3
    assert body[0][2] == "true"
