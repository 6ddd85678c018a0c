import numpy as np
import pytest

from skelid.datasets import (
    DatasetSpec,
    gaussian_exp_spectrum,
    gen_gaussian_exp,
    gen_gmm,
    gen_helmholtz,
    gen_snn,
    generate,
    helmholtz_kernel,
    helmholtz_points,
    load_matrix,
    normalize_rows,
    save_matrix,
    snn_factors,
)


# gmm -------------------------------------------------------------------------

def test_gmm_shape_and_cluster_means():
    x = gen_gmm(seed=0)
    assert x.shape == (2000, 500)
    m = 20
    for j in (1, 2, 50, 100):
        block = x[(j - 1) * m : j * m]
        assert abs(block[:, j - 1].mean() - 10 * j) <= 4 / np.sqrt(m)
        # off-centre columns stay pure noise
        assert abs(block[:, j % 500].mean()) <= 4 / np.sqrt(m)


def test_gmm_row_norms():
    n, d, c = 4000, 200, 20
    x = gen_gmm(n, d, c, seed=1)
    m = n // c
    for j in (1, 7, 20):
        sq = np.sum(x[(j - 1) * m : j * m] ** 2, axis=1)
        sd = np.sqrt((2 * d + 400 * j**2) / m)
        assert abs(sq.mean() - (100 * j**2 + d)) <= 5 * sd


def test_gmm_constraints():
    with pytest.raises(ValueError):
        gen_gmm(n=101, d=50, clusters=10)
    with pytest.raises(ValueError):
        gen_gmm(n=100, d=5, clusters=10)


# gaussian-exp -------------------------------------------------------------------

def test_gaussian_exp_spectrum_recovery():
    x = gen_gaussian_exp(1000, seed=2)
    sigma = np.linalg.svd(x, compute_uv=False)
    assert np.max(np.abs(sigma - gaussian_exp_spectrum(1000))) <= 1e-8


def test_gaussian_exp_spectrum_shape():
    s = gaussian_exp_spectrum(1000)
    assert np.all(s[:100] == 1.0)
    assert s[100] == pytest.approx(0.8)
    assert s[-1] == 1e-5
    x = gen_gaussian_exp(101, seed=0)
    assert x.shape == (101, 101)


# snn -------------------------------------------------------------------------

def test_snn_factors_and_coefficients():
    n = 400
    u, c, v = snn_factors(n, 0.1, seed=3)
    for f in (u, v):
        assert np.all(f >= 0.0) and np.all(f <= 1.0)
        assert abs(np.count_nonzero(f) / f.size - 0.1) <= 1 / np.sqrt(n)
    assert c[0] == 10.0
    assert c[100] == pytest.approx(1 / 101)


def test_snn_term_sum_oracle():
    n = 300
    u, c, v = snn_factors(n, 0.1, seed=4)
    oracle = np.zeros((n, n))
    for i in range(n):
        for a in np.flatnonzero(u[:, i]):
            oracle[a] += c[i] * u[a, i] * v[:, i]
    assert np.max(np.abs(gen_snn(n, 0.1, seed=4) - oracle)) <= 1e-10


def test_snn_sparsity_validation():
    for bad in (0.0, 1.5, -0.1):
        with pytest.raises(ValueError):
            gen_snn(20, bad)


# helmholtz ---------------------------------------------------------------------

def test_helmholtz_unit_modulus_at_distance_two():
    g = helmholtz_kernel(np.zeros((1, 3)), np.array([[2.0, 0.0, 0.0]]), 5.5)
    assert g[0, 0] ** 2 + g[0, 1] ** 2 == pytest.approx((1 / (8 * np.pi)) ** 2, rel=1e-14)


def test_helmholtz_geometry_and_shape():
    sources, targets = helmholtz_points()
    assert sources.shape == (3375, 3) and targets.shape == (2000, 3)
    assert np.allclose(np.linalg.norm(targets, axis=1), 3.0)
    assert np.max(np.abs(sources)) == pytest.approx(1.0)
    nodes = np.unique(sources[:, 0])
    assert np.allclose(np.sort(nodes), np.sort(np.cos(np.arange(15) * np.pi / 14)))
    dmin = np.min(np.linalg.norm(sources[:, None, :] - targets[None, ::10, :], axis=2))
    assert dmin >= 3 - np.sqrt(3)


def test_helmholtz_embedded_modulus_identity():
    x = gen_helmholtz()
    assert x.shape == (3375, 4000)
    sources, targets = helmholtz_points()
    rng = np.random.default_rng(0)
    i, j = rng.integers(0, 3375, 100), rng.integers(0, 2000, 100)
    r = np.linalg.norm(sources[i] - targets[j], axis=1)
    expected = (1 / (4 * np.pi * r)) ** 2
    got = x[i, j] ** 2 + x[i, j + 2000] ** 2
    assert np.max(np.abs(got - expected) / expected) <= 1e-12


def test_helmholtz_coincident_points():
    with pytest.raises(ValueError, match="coincides"):
        helmholtz_kernel(np.zeros((2, 3)), np.zeros((1, 3)), 1.0)


# determinism -------------------------------------------------------------------

@pytest.mark.parametrize(
    "spec",
    [
        DatasetSpec("gmm", {"n": 200, "d": 40, "clusters": 10}, 5),
        DatasetSpec("gaussian_exp", {"n": 120}, 5),
        DatasetSpec("snn", {"n": 100}, 5),
        DatasetSpec("helmholtz", {"grid_per_axis": 4, "n_targets": 30}, 5),
    ],
)
def test_generators_bit_deterministic(spec):
    assert generate(spec).tobytes() == generate(spec).tobytes()
    other = DatasetSpec(spec.kind, spec.params, spec.seed + 1)
    assert not np.array_equal(generate(spec), generate(other))


def test_dataset_spec_kind():
    with pytest.raises(ValueError):
        DatasetSpec("mnist")


# file formats -------------------------------------------------------------------

def test_csv_load(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("1,2\n3,4\n")
    assert load_matrix(p).tolist() == [[1.0, 2.0], [3.0, 4.0]]


def test_raw_roundtrip_bit_identical(tmp_path, rng):
    x = rng.standard_normal((10, 7))
    p = tmp_path / "m.bin"
    save_matrix(x, p)
    assert load_matrix(p).tobytes() == x.tobytes()
    assert generate(DatasetSpec("file", {"path": str(p)})).tobytes() == x.tobytes()


def test_csv_roundtrip_exact(tmp_path, rng):
    x = rng.standard_normal((4, 3))
    p = tmp_path / "m.csv"
    save_matrix(x, p)
    assert np.array_equal(load_matrix(p), x)


def test_raw_empty_header(tmp_path):
    p = tmp_path / "e.bin"
    p.write_bytes(np.array([0, 0], dtype="<i8").tobytes())
    assert load_matrix(p).shape == (0, 0)


def test_raw_truncated(tmp_path):
    p = tmp_path / "t.bin"
    save_matrix(np.ones((3, 3)), p)
    p.write_bytes(p.read_bytes()[:-8])
    with pytest.raises(ValueError, match="expected"):
        load_matrix(p)
    p.write_bytes(b"\x01\x02")
    with pytest.raises(ValueError, match="truncated"):
        load_matrix(p)


def test_non_finite_located(tmp_path):
    p = tmp_path / "n.csv"
    p.write_text("1,2\n3,nan\n")
    with pytest.raises(ValueError, match="row 1, column 1"):
        load_matrix(p)
    q = tmp_path / "n.bin"
    x = np.zeros((2, 3))
    x[0, 2] = np.inf
    save_matrix(x, q)
    with pytest.raises(ValueError, match="row 0, column 2"):
        load_matrix(q)


def test_csv_ragged_and_garbage(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text("1,2\n3\n")
    with pytest.raises(ValueError, match="row 1"):
        load_matrix(p)
    p.write_text("1,x\n")
    with pytest.raises(ValueError, match="row 0"):
        load_matrix(p)


def test_normalize_rows(rng):
    x = rng.standard_normal((5, 3))
    x[2] = 0.0
    r = normalize_rows(x, "row")
    assert np.allclose(np.linalg.norm(r[[0, 1, 3, 4]], axis=1), 1.0)
    assert not np.any(r[2])
    assert np.max(np.abs(normalize_rows(x, "max"))) == pytest.approx(1.0)
    assert normalize_rows(x) is x
    with pytest.raises(ValueError):
        normalize_rows(x, "pixel")
