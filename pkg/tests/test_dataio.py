import numpy as np
import pytest

from ilsc import dataio
from ilsc.bayes import Dataset, posterior, train
from ilsc.errors import FormatError, UnsupportedFormatError, ValidationError
from ilsc.speckle import SpeckleImage, SynthParams, two_class_corpus
from ilsc.texture import ATTRIBUTE_NAMES


# --- feature CSV ----------------------------------------------------------------

def test_table1_fixture(table1_path):
    ds = dataio.read_feature_csv(table1_path)
    assert len(ds) == 11 and ds.class_values == ["h", "d"]
    assert ds.attribute_names == ATTRIBUTE_NAMES
    assert ds.values[0].tolist() == [421, 111, 10.54, 1.78, 91, 169, 13, -1.43, 30.73]
    assert ds.labels[0] == "h" and ds.sample_ids[-1] == 40


def test_table1_round_trip_bytes(table1_path, tmp_path):
    out = tmp_path / "copy.csv"
    dataio.write_feature_csv(dataio.read_feature_csv(table1_path), out)
    assert out.read_bytes() == table1_path.read_bytes()


def test_round_trip_shortest_floats(tmp_path):
    rng = np.random.default_rng(1)
    ds = Dataset(rng.normal(size=(6, 9)) * 1e3, ["h", "d", "x", "h", "d", "x"])
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    dataio.write_feature_csv(ds, a)
    back = dataio.read_feature_csv(a)
    assert np.array_equal(back.values, ds.values)
    assert back.class_values == ["h", "d", "x"]
    dataio.write_feature_csv(back, b)
    assert a.read_bytes() == b.read_bytes()


def write(tmp_path, text):
    p = tmp_path / "f.csv"
    p.write_text(text)
    return p


HEADER = ",".join(dataio.CSV_HEADER)


@pytest.mark.parametrize("body, match", [
    (HEADER + "\n", "fewer than 2 rows"),
    (HEADER + "\n1,1,2,3,4,5,6,7,8,9,h\n2,1,2,3,4,5,6,7,8,h\n", "row 2.*missing column 'class'"),
    (HEADER + "\n1,1,2,3,4,5,6,7,8,9,h\n2,1,2,abc,4,5,6,7,8,9,d\n", "row 2, column 'sigm1'"),
    (HEADER + "\n1,1,2,3,4,5,6,7,8,9,h\n1,1,2,3,4,5,6,7,8,9,d\n", "duplicate sample_no"),
    (HEADER + "\n1,1,2,3,4,5,6,7,8,nan,h\n2,1,2,3,4,5,6,7,8,9,d\n", "non-finite"),
    (HEADER + "\n0,1,2,3,4,5,6,7,8,9,h\n2,1,2,3,4,5,6,7,8,9,d\n", "positive"),
    ("sample_no,a,b\n", "header mismatch"),
])
def test_csv_errors(tmp_path, body, match):
    with pytest.raises(FormatError, match=match):
        dataio.read_feature_csv(write(tmp_path, body))


def test_write_rejects_foreign_schema(tmp_path):
    with pytest.raises(ValidationError):
        dataio.write_feature_csv(Dataset(np.zeros((2, 2)), ["h", "d"], ("a", "b")), tmp_path / "x.csv")
    with pytest.raises(ValidationError):
        Dataset(np.zeros((2, 0)), ["h", "d"], ())


# --- PGM --------------------------------------------------------------------------

def test_pgm_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    img = SpeckleImage(rng.integers(0, 256, size=(7, 11), dtype=np.uint8), resolution_um_per_px=3.5)
    a = tmp_path / "a.pgm"
    dataio.write_pgm(img, a)
    back = dataio.read_pgm(a)
    assert np.array_equal(back.pixels, img.pixels)
    assert back.resolution_um_per_px == 3.5 and not back.resolution_defaulted
    b = tmp_path / "b.pgm"
    dataio.write_pgm(back, b)
    assert a.read_bytes() == b.read_bytes()


def test_pgm_minimal_and_default_resolution(tmp_path):
    p = tmp_path / "one.pgm"
    p.write_bytes(b"P5\n1 1\n255\n\x00")
    img = dataio.read_pgm(p)
    assert img.pixels.tolist() == [[0]]
    assert img.resolution_um_per_px == 2.8 and img.resolution_defaulted


def test_pgm_foreign_header_layout(tmp_path):
    p = tmp_path / "x.pgm"
    p.write_bytes(b"P5 # made elsewhere\n2\n# resolution_um_per_px=1.25\n2 255\n\x01\x02\x03\x04")
    img = dataio.read_pgm(p)
    assert img.pixels.tolist() == [[1, 2], [3, 4]] and img.resolution_um_per_px == 1.25


@pytest.mark.parametrize("data, err, match", [
    (b"P2\n1 1\n255\n0\n", UnsupportedFormatError, "P2"),
    (b"P5\n1 1\n65535\n\x00\x00", UnsupportedFormatError, "maxval"),
    (b"P5\n2 2\n255\n\x00\x01", FormatError, "unexpected EOF"),
    (b"P5\n2 2\n", FormatError, "unexpected EOF"),
    (b"GIF89a", UnsupportedFormatError, "P5"),
])
def test_pgm_errors(tmp_path, data, err, match):
    p = tmp_path / "bad.pgm"
    p.write_bytes(data)
    with pytest.raises(err, match=match):
        dataio.read_pgm(p)


def test_pgm_rejects_float_image(tmp_path):
    with pytest.raises(ValidationError):
        dataio.write_pgm(SpeckleImage(np.ones((2, 2))), tmp_path / "f.pgm")


# --- manifest / corpus ------------------------------------------------------------

def small_corpus(n=20):
    return two_class_corpus(SynthParams(60, 2, 0, width=32, height=32),
                            SynthParams(60, 2, 2, width=32, height=32), n, 11)


def save_corpus(corpus, folder):
    for item in corpus:
        dataio.write_pgm(item.image, folder / item.name)
    dataio.write_manifest(corpus, folder / "manifest.tsv")
    return folder / "manifest.tsv"


def test_ingest_generated_corpus(tmp_path):
    corpus = small_corpus()
    loaded = dataio.ingest_corpus(save_corpus(corpus, tmp_path))
    assert len(loaded) == 40
    for a, b in zip(corpus, loaded):
        assert (a.name, a.label, a.seed) == (b.name, b.label, b.seed)
        assert np.array_equal(a.image.pixels, b.image.pixels)


def test_manifest_absolute_paths(tmp_path):
    img = SpeckleImage(np.zeros((3, 3), dtype=np.uint8))
    dataio.write_pgm(img, tmp_path / "a.pgm")
    m = tmp_path / "sub" / "m.tsv"
    m.parent.mkdir()
    m.write_text(f"{tmp_path / 'a.pgm'}\th\n")
    loaded = dataio.ingest_corpus(m)
    assert loaded.labels == ["h"] and loaded.items[0].seed is None


def test_manifest_errors(tmp_path):
    m = tmp_path / "m.tsv"
    m.write_text("")
    with pytest.raises(FormatError, match="empty manifest"):
        dataio.ingest_corpus(m)
    m.write_text("a.pgm\th\t1\na.pgm\td\t2\n")
    with pytest.raises(FormatError, match="line 2.*duplicate"):
        dataio.ingest_corpus(m)
    m.write_text("gone.pgm\th\t1\n")
    with pytest.raises(dataio.MissingFileError, match="line 1"):
        dataio.ingest_corpus(m)
    m.write_text("only-one-field\n")
    with pytest.raises(FormatError, match="line 1"):
        dataio.ingest_corpus(m)


# --- model document ---------------------------------------------------------------

def test_model_round_trip(table1_path, tmp_path):
    ds = dataio.read_feature_csv(table1_path)
    net = train(ds, 3, 0.05, 1.0)
    path = tmp_path / "model.json"
    dataio.save_model(net, path)
    back = dataio.load_model(path)
    assert back.edges == net.edges and back.threshold == 0.05 and back.n_bins == 3 and back.alpha == 1.0
    for x in ds.values:
        assert np.abs(posterior(back, x) - posterior(net, x)).max() <= 1e-12
    dataio.save_model(back, tmp_path / "again.json")
    assert (tmp_path / "again.json").read_bytes() == path.read_bytes()


def test_model_malformed(tmp_path):
    p = tmp_path / "m.json"
    p.write_text("{not json")
    with pytest.raises(FormatError):
        dataio.load_model(p)
    p.write_text('{"format": "ilsc-bayes-net"}')
    with pytest.raises(FormatError):
        dataio.load_model(p)
