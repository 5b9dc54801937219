import numpy as np
import pytest

from skel2img.encoder import ImageMeta, S2IImage
from skel2img.stats import (
    ChannelStats,
    accumulate,
    denormalize,
    image_stats,
    load_manifest,
    load_stats,
    merge,
    normalize,
    save_stats,
)

from oracles import two_pass_stats

META = ImageMeta(4, 25, "ntu25", tuple(range(25)))


def img(px):
    return S2IImage(np.asarray(px, dtype=np.float64), META)


def test_constant_image():
    s = accumulate(ChannelStats(), img(np.tile([1.0, 2.0, 3.0], (5, 6, 1))))
    np.testing.assert_allclose(s.mean, [1, 2, 3])
    np.testing.assert_allclose(s.std, 0, atol=1e-15)


def test_two_constant_images():
    s = ChannelStats()
    for v in (0.0, 2.0):
        s = accumulate(s, img(np.full((4, 4, 3), v)))
    np.testing.assert_allclose(s.mean, 1.0)
    np.testing.assert_allclose(s.std, 1.0)


def test_order_invariance_and_two_pass_oracle():
    rng = np.random.default_rng(0)
    images = [rng.normal(loc=rng.uniform(-3, 3), size=(8, 9, 3)) for _ in range(100)]
    fwd, rev = ChannelStats(), ChannelStats()
    for im in images:
        fwd = accumulate(fwd, im)
    for im in images[::-1]:
        rev = accumulate(rev, im)
    n, mean, std = two_pass_stats(images)
    assert fwd.count == rev.count == n
    np.testing.assert_allclose(fwd.mean, rev.mean, rtol=1e-9)
    np.testing.assert_allclose(fwd.std, rev.std, rtol=1e-9)
    np.testing.assert_allclose(fwd.mean, mean, rtol=1e-9)
    np.testing.assert_allclose(fwd.std, std, rtol=1e-9)


def test_merge_identity_and_symmetry():
    rng = np.random.default_rng(1)
    a = image_stats(rng.normal(size=(5, 5, 3)), "a")
    b = image_stats(rng.normal(2, 3, size=(7, 4, 3)), "b")
    e = merge(a, ChannelStats())
    assert e.count == a.count and np.array_equal(e.mean, a.mean) and np.array_equal(e.m2, a.m2)
    ab, ba = merge(a, b), merge(b, a)
    np.testing.assert_allclose(ab.mean, ba.mean, rtol=1e-9)
    np.testing.assert_allclose(ab.m2, ba.m2, rtol=1e-9)
    assert ab.source_ids == ("a", "b")


def test_merge_associative():
    rng = np.random.default_rng(2)
    a, b, c = (image_stats(rng.normal(k, 1 + k, size=(6, 6, 3))) for k in range(3))
    l, r = merge(merge(a, b), c), merge(a, merge(b, c))
    np.testing.assert_allclose(l.mean, r.mean, rtol=1e-12)
    np.testing.assert_allclose(l.m2, r.m2, rtol=1e-12)


def test_normalize_own_stats():
    x = img(np.random.default_rng(3).normal(5, 2, size=(10, 12, 3)))
    s = accumulate(ChannelStats(), x)
    n = normalize(x, s)
    np.testing.assert_allclose(n.pixels.reshape(-1, 3).mean(axis=0), 0, atol=1e-12)
    np.testing.assert_allclose(n.pixels.reshape(-1, 3).std(axis=0), 1, atol=1e-12)
    assert n.meta.normalized
    np.testing.assert_allclose(denormalize(n, s).pixels, x.pixels, atol=1e-6)


def test_normalize_zero_std():
    x = img(np.ones((3, 3, 3)))
    with pytest.raises(ValueError, match="zero std"):
        normalize(x, accumulate(ChannelStats(), x))


def test_stats_file_round_trip(tmp_path):
    s = image_stats(np.random.default_rng(4).normal(size=(3, 4, 3)), "m1")
    save_stats(s, tmp_path / "s.json")
    back = load_stats(tmp_path / "s.json")
    assert back.count == s.count and back.source_ids == ("m1",)
    np.testing.assert_array_equal(back.mean, s.mean)
    np.testing.assert_array_equal(back.m2, s.m2)
    # documents without m2 fall back to std
    back2 = ChannelStats.from_dict({"count": s.count, "mean": s.mean.tolist(),
                                    "std": s.std.tolist()})
    np.testing.assert_allclose(back2.m2, s.m2, rtol=1e-12)


def test_manifest(tmp_path):
    (tmp_path / "m.jsonl").write_text(
        '{"manifest_id": "ntu120-train"}\n'
        '{"sample_id": "a", "path": "a.skeleton", "format_id": "ntu25"}\n'
        '\n'
        '{"sample_id": "b", "path": "b.json", "format_id": "toyota13", "stream": "bone", '
        '"label": 3}\n')
    m = load_manifest(tmp_path / "m.jsonl")
    assert m.manifest_id == "ntu120-train"
    assert [e.sample_id for e in m.entries] == ["a", "b"]
    assert m.entries[1].stream == "bone" and m.entries[1].label == 3
    assert m.entries[0].path == tmp_path / "a.skeleton"
    (tmp_path / "dup.jsonl").write_text(
        '{"sample_id": "a", "path": "a", "format_id": "ntu25"}\n' * 2)
    with pytest.raises(ValueError, match="duplicate"):
        load_manifest(tmp_path / "dup.jsonl")
