"""Regenerates the three projection fixture frames (velodyne + calib)."""

import pathlib

import numpy as np

HERE = pathlib.Path(__file__).resolve().parent

P2 = [7.215377e02, 0.0, 6.095593e02, 4.485728e01,
      0.0, 7.215377e02, 1.728540e02, 2.163791e-01,
      0.0, 0.0, 1.0, 2.745884e-03]
R0 = [9.999239e-01, 9.837760e-03, -7.445048e-03,
      -9.869795e-03, 9.999421e-01, -4.278459e-03,
      7.402527e-03, 4.351614e-03, 9.999631e-01]
TR = [7.533745e-03, -9.999714e-01, -6.166020e-04, -4.069766e-03,
      1.480249e-02, 7.280733e-04, -9.998902e-01, -7.631618e-02,
      9.998621e-01, 7.523790e-03, 1.480755e-02, -2.717806e-01]


def scene(rng, n_ground, n_boxes):
    ground = np.column_stack([
        3.0 + 72.0 * rng.uniform(0.0, 1.0, n_ground) ** 2,
        rng.uniform(-25.0, 25.0, n_ground),
        rng.normal(-1.73, 0.02, n_ground),
    ])
    parts = [ground]
    for _ in range(n_boxes):
        cx, cy = rng.uniform(5.0, 60.0), rng.uniform(-12.0, 12.0)
        sx, sy, sz = rng.uniform(0.6, 4.5), rng.uniform(0.6, 2.0), rng.uniform(1.2, 1.9)
        m = 400
        parts.append(np.column_stack([
            cx + rng.uniform(-sx / 2, sx / 2, m),
            cy + rng.uniform(-sy / 2, sy / 2, m),
            -1.73 + rng.uniform(0.0, sz, m),
        ]))
    pts = np.vstack(parts)
    intensity = rng.uniform(0.0, 1.0, len(pts))
    return np.column_stack([pts, intensity]).astype("<f4")


def fmt(vals):
    return " ".join(f"{v:.12e}" for v in vals)


def main():
    rng = np.random.default_rng(20191104)
    for i, (n_ground, n_boxes, shift) in enumerate([(6000, 4, 0.0), (9000, 7, 12.5), (3000, 2, -8.0)]):
        name = f"{i:06d}"
        scene(rng, n_ground, n_boxes).tofile(HERE / "velodyne" / f"{name}.bin")
        p2 = list(P2)
        p2[2] += shift
        (HERE / "calib" / f"{name}.txt").write_text(
            f"P0: {fmt(P2)}\nP1: {fmt(P2)}\nP2: {fmt(p2)}\nP3: {fmt(P2)}\n"
            f"R0_rect: {fmt(R0)}\nTr_velo_to_cam: {fmt(TR)}\nTr_imu_to_velo: {fmt(TR)}\n")


if __name__ == "__main__":
    main()
