"""Regenerate the NTU and generic-JSON fixtures. Run from the repo root."""
from pathlib import Path

import numpy as np

from skel2img.ingest import RawBodyFrame, format_ntu_skeleton

HERE = Path(__file__).parent
BODY_A = "72057594037931101"
BODY_B = "72057594037931102"
INFO = ("0", "1", "1", "1", "1", "0", "-0.437266", "-0.0536", "2")


def body(body_id, joints):
    extra = np.zeros((len(joints), 9))
    extra[:, -1] = 2
    return RawBodyFrame(body_id, np.asarray(joints, dtype=float), extra, INFO)


def pose(t, shift=0.0):
    # deterministic, distinct per joint and frame
    j = np.arange(25)[:, None]
    return np.round(np.hstack([0.01 * j + 0.1 * t + shift, -0.02 * j + shift,
                               3.0 + 0.001 * j + 0.05 * t]), 6)


def main():
    ntu = HERE / "ntu"
    ntu.mkdir(exist_ok=True)
    zeros = np.zeros((25, 3))
    (ntu / "valid_zeros.skeleton").write_text(
        format_ntu_skeleton([[body(BODY_A, zeros)], [body(BODY_A, zeros)]]))
    (ntu / "valid_one_body.skeleton").write_text(
        format_ntu_skeleton([[body(BODY_A, pose(t))] for t in range(4)]))
    # bodies written in descending id order on purpose; the splitter sorts them
    (ntu / "two_body.skeleton").write_text(format_ntu_skeleton(
        [[body(BODY_A, pose(0))],
         [body(BODY_B, pose(1, 1.0)), body(BODY_A, pose(1))],
         [body(BODY_A, pose(2))]]))
    (ntu / "zero_frame.skeleton").write_text(format_ntu_skeleton(
        [[body(BODY_A, zeros)]] + [[body(BODY_A, pose(t))] for t in range(1, 3)]))
    text = format_ntu_skeleton([[body(BODY_A, pose(t))] for t in range(3)])
    lines = text.splitlines(keepends=True)
    (ntu / "truncated.skeleton").write_text("".join(lines[:1 + 2 * 28]))
    (ntu / "three_body.skeleton").write_text(format_ntu_skeleton(
        [[body(BODY_A, pose(0)), body(BODY_B, pose(0)), body("7", pose(0))]]))
    bad = text.splitlines(keepends=True)
    bad[5] = bad[5].replace(bad[5].split()[1], "abc", 1)
    (ntu / "non_numeric.skeleton").write_text("".join(bad))


if __name__ == "__main__":
    main()
