import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skel2img.encoder import (
    S2IImage,
    decode,
    encode,
    export,
    import_image,
    read_f32raw,
    resize_linear,
    validate_sidecar,
)
from skel2img.formats import builtin_format, s2i_joint_order
from skel2img.ingest import SkeletonSequence

from helpers import chain_format
from oracles import bilinear_align_corners

NTU = builtin_format("ntu25")


def test_identity_size_copies_exactly():
    fmt = chain_format(224)
    frames = np.random.default_rng(0).normal(size=(224, 224, 3))
    img = encode(SkeletonSequence(fmt.format_id, frames), fmt)
    np.testing.assert_array_equal(img.pixels, frames[:, s2i_joint_order(fmt), :])


def test_single_sample_is_constant_image():
    fmt = chain_format(5)
    frames = np.zeros((1, 5, 3))
    frames[:] = [0.5, -0.5, 1.0]
    img = encode(SkeletonSequence(fmt.format_id, frames), fmt)
    assert img.pixels.shape == (224, 224, 3)
    assert np.all(img.pixels == [0.5, -0.5, 1.0])


def test_single_joint_single_frame_constant():
    grid = np.array([[[0.5, -0.5, 1.0]]])
    out = resize_linear(grid, (224, 224))
    assert np.all(out == [0.5, -0.5, 1.0])


def test_two_by_two_to_three_by_three():
    grid = np.zeros((2, 2, 3))
    grid[..., 0] = [[0, 1], [2, 3]]
    out = resize_linear(grid, (3, 3))
    np.testing.assert_allclose(out[..., 0], [[0, .5, 1], [1, 1.5, 2], [2, 2.5, 3]], atol=1e-15)


@pytest.mark.parametrize("shape, size", [
    ((1, 7, 3), (5, 4)), ((6, 1, 3), (3, 9)), ((5, 8, 3), (1, 1)), ((3, 4, 3), (3, 4)),
    ((9, 25, 3), (16, 32)), ((40, 3, 3), (7, 11)),
])
def test_resize_matches_oracle(shape, size):
    grid = np.random.default_rng(1).normal(size=shape)
    np.testing.assert_allclose(resize_linear(grid, size),
                               bilinear_align_corners(grid, *size), atol=1e-12)


def test_encode_rejects_wrong_joint_count():
    with pytest.raises(ValueError):
        encode(SkeletonSequence("ntu25", np.zeros((2, 20, 3))), NTU)


def test_meta_records_encoding():
    seq = SkeletonSequence("ntu25", np.zeros((8, 25, 3)), sample_id="abc")
    img = encode(seq, NTU, (32, 48))
    assert img.pixels.shape == (32, 48, 3)
    assert img.meta.original_T == 8 and img.meta.original_J == 25
    assert img.meta.joint_order == tuple(s2i_joint_order(NTU))
    assert img.meta.sample_id == "abc" and img.meta.format_id == "ntu25"


def test_decode_identity_size():
    fmt = chain_format(224)
    frames = np.random.default_rng(2).normal(size=(224, 224, 3))
    back = decode(encode(SkeletonSequence(fmt.format_id, frames), fmt))
    np.testing.assert_allclose(back.frames, frames, atol=1e-6)


def test_decode_recovers_corners():
    frames = np.random.default_rng(3).normal(size=(8, 25, 3))
    back = decode(encode(SkeletonSequence("ntu25", frames), NTU))
    order = s2i_joint_order(NTU)
    for t in (0, 7):
        for j in (order[0], order[-1]):
            np.testing.assert_allclose(back.frames[t, j], frames[t, j], atol=1e-12)


def test_decode_exact_when_knots_align():
    # (H-1)/(T-1) and (W-1)/(J-1) integral: every original sample is a pixel
    frames = np.random.default_rng(4).normal(size=(8, 25, 3))
    back = decode(encode(SkeletonSequence("ntu25", frames), NTU, (15, 49)))
    np.testing.assert_allclose(back.frames, frames, atol=1e-12)


def test_decode_constant_image():
    img = encode(SkeletonSequence("ntu25", np.full((6, 25, 3), 2.5)), NTU)
    assert np.all(decode(img, 10, 25).frames == 2.5)


def _image(seed=0, shape=(12, 20, 3)):
    seq = SkeletonSequence("ntu25", np.random.default_rng(seed).normal(size=(9, 25, 3)),
                           sample_id="s")
    return encode(seq, NTU, shape[:2])


def test_f32raw_round_trip_bit_identical():
    img = _image()
    data, doc = export(img, "f32raw")
    assert data[:4] == b"S2I1"
    assert int.from_bytes(data[4:8], "little") == 12 and int.from_bytes(data[8:12], "little") == 20
    assert len(data) == 12 + 12 * 20 * 3 * 4
    back = import_image(data, doc)
    assert back.pixels.dtype == np.float32
    assert back.pixels.tobytes() == img.pixels.astype("<f4").tobytes()
    assert export(back, "f32raw")[0] == data
    assert back.meta == img.meta


def test_f32raw_rejects_bad_payloads():
    data, _ = export(_image(), "f32raw")
    with pytest.raises(ValueError, match="magic"):
        read_f32raw(b"XXXX" + data[4:])
    with pytest.raises(ValueError, match="bytes"):
        read_f32raw(data[:-4])


def test_png8_constant_channel():
    px = np.random.default_rng(5).normal(size=(8, 8, 3))
    px[..., 1] = 4.2
    img = S2IImage(px, _image().meta)
    data, doc = export(img, "png8")
    from PIL import Image
    import io
    raw = np.asarray(Image.open(io.BytesIO(data)))
    assert raw.dtype == np.uint8 and raw.shape == (8, 8, 3)
    assert np.all(raw[..., 1] == 128)
    assert doc["channel_affine"][1] == [0.0, 4.2]
    assert np.all(import_image(data, doc).pixels[..., 1] == 4.2)


def test_png8_quantization_bound():
    img = _image(6, (32, 32, 3))
    data, doc = export(img, "png8")
    back = import_image(data, doc).pixels
    for c in range(3):
        ch = img.pixels[..., c]
        bound = (ch.max() - ch.min()) / 255 * 0.5
        assert np.abs(back[..., c] - ch).max() <= bound + 1e-12


def test_sidecar_validation():
    data, doc = export(_image(), "f32raw")
    assert validate_sidecar(doc, data) == []
    bad = dict(doc, joint_order=[0] * 25)
    assert any("permutation" in p for p in validate_sidecar(bad, data))
    bad = dict(doc, height=99)
    assert any("sidecar says" in p for p in validate_sidecar(bad, data))
    assert validate_sidecar({"sample_id": "x"}) and "missing" in validate_sidecar({})[0]


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.integers(1, 20), st.integers(1, 20),
       st.integers(0, 2**32 - 1))
def test_resize_oracle_property(a, b, h, w, seed):
    grid = np.random.default_rng(seed).uniform(-3, 3, size=(a, b, 3))
    out = resize_linear(grid, (h, w))
    np.testing.assert_allclose(out, bilinear_align_corners(grid, h, w), atol=1e-12)
    assert np.all(out.min(axis=(0, 1)) >= grid.min(axis=(0, 1)) - 1e-12)
    assert np.all(out.max(axis=(0, 1)) <= grid.max(axis=(0, 1)) + 1e-12)


@pytest.mark.parametrize("shape, size", [((1, 7, 3), (5, 4)), ((9, 25, 3), (16, 32)),
                                         ((3, 1, 3), (8, 2)), ((6, 6, 3), (1, 1))])
def test_gather_oracle_agrees_with_loop_oracle(shape, size):
    from oracles import bilinear_gather
    grid = np.random.default_rng(9).normal(size=shape)
    np.testing.assert_allclose(bilinear_gather(grid, *size), bilinear_align_corners(grid, *size),
                               atol=1e-14)
