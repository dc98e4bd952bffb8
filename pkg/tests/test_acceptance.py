"""Exit criteria of the build; a PASS/FAIL line per criterion is printed at the end."""

import time

import numpy as np
import pytest

from svbounds.catalog import PowerAbs, random_trig
from svbounds.ensembles import haar_unitary, random_pair, trial_rng
from svbounds.extremal import line_transfer, rho, tn_side, verify_lower
from svbounds.harness import (
    PairCalculus,
    SweepConfig,
    choose_N,
    periodize_for_pair,
    random_witnesses,
    split_auto,
    sweep,
)
from svbounds.lpdecomp import decompose, partition_deviation
from svbounds.modulus import Modulus, omega_sharp, omega_star
from svbounds.spectral import schatten_curve, singular_values
from svbounds.trig import TrigPolynomial

SEED = 2024
CAP = 100.0
GROWTH_LIMIT = 0.10
ALPHAS = (0.25, 0.5, 0.75)


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


@pytest.mark.acceptance("AC1")
def test_ac1_partition_of_unity():
    with Timer() as t:
        dev = partition_deviation(2048)
    assert dev <= 1e-12
    assert t.elapsed < 1.0


@pytest.mark.acceptance("AC2")
def test_ac2_reconstruction():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    with Timer() as t:
        for _ in range(50):
            K = int(rng.integers(1, 513))
            f = TrigPolynomial.from_dense(rng.standard_normal(2 * K + 1) + 1j * rng.standard_normal(2 * K + 1))
            levels = int(rng.integers(0, 11))
            dec = decompose(f, levels)
            back = dec.reassemble()
            D = max(K, back.degree)
            worst = max(worst, float(np.abs(back.dense(D) - f.dense(D)).max()))
    assert worst <= 1e-13
    assert t.elapsed < 5.0


@pytest.mark.acceptance("AC3")
def test_ac3_singular_value_properties():
    rng = np.random.default_rng(SEED)
    worst_slack, worst_inv = -np.inf, 0.0
    with Timer() as t:
        for _ in range(200):
            d = int(rng.integers(1, 65))
            M = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            s = singular_values(M).values
            j = np.arange(d)
            for p in (1.0, 2.0, 4.0):
                curve = schatten_curve(s, p)
                # rows j, columns l; only j <= l counts
                lhs = s[:, None]
                rhs = (1.0 + j[:, None]) ** (-1.0 / p) * curve[None, :]
                mask = j[:, None] <= j[None, :]
                worst_slack = max(worst_slack, float(np.max(np.where(mask, lhs - rhs * (1 + 1e-12), -np.inf))))
            U, V = haar_unitary(d, rng), haar_unitary(d, rng)
            worst_inv = max(worst_inv, float(np.abs(singular_values(U @ M @ V).values - s).max()))
    assert worst_slack <= 0.0
    assert worst_inv <= 1e-10
    assert t.elapsed < 10.0


@pytest.mark.acceptance("AC4")
def test_ac4_choose_n_bracket():
    deltas = np.logspace(-8, 4, 40)
    with Timer() as t:
        for j in range(65):
            for p in (1, 2, 3, 4):
                for delta in deltas:
                    N = choose_N(j, p, float(delta))
                    x = (1.0 + j) ** (-1.0 / p) * 2.0**N * delta
                    assert 1.0 <= x <= 2.0, (j, p, delta, N)
    assert t.elapsed < 1.0


def _split_case(case: int):
    rng = trial_rng(SEED, case)
    dim = int(rng.integers(2, 33))
    p = float(rng.choice([1.0, 2.0, 4.0]))
    l = int(rng.integers(0, dim))
    delta = float(np.exp(rng.uniform(np.log(1e-3), 0.0)))
    mode = ("gaussian", "rank")[int(rng.integers(2))]
    if case % 2 == 0:
        pair = random_pair("unitary", dim, delta, rng, mode=mode)
        f = random_trig(int(rng.integers(1, 129)), int(rng.integers(2**31)))
        poly = f
    else:
        pair = random_pair("selfadjoint", dim, delta, rng, mode=mode)
        f = PowerAbs(float(rng.uniform(0.1, 1.0)))
        poly = periodize_for_pair(f, pair)
    j = int(rng.integers(0, l + 1))
    return pair, f, poly, j, p, l


@pytest.mark.acceptance("AC5")
def test_ac5_split_identity():
    worst_id, worst_sv = 0.0, -np.inf
    with Timer() as t:
        for case in range(50):
            pair, f, poly, j, p, l = _split_case(case)
            res = split_auto(f, pair, j, p, l)
            calc = PairCalculus(pair)
            g = poly if pair.kind == "unitary" else poly.evaluate_line
            exact = calc.diff(g)
            worst_id = max(worst_id, float(np.linalg.norm(res.total() - exact, 2)))
            s, sR = singular_values(exact), singular_values(res.R)
            worst_sv = max(worst_sv, max(s[k] - sR[k] - res.norm_Q for k in range(pair.dim)))
    assert worst_id <= 1e-10
    assert worst_sv <= 1e-10
    assert t.elapsed < 30.0


# -- ensemble sweeps --------------------------------------------------------


def _config(kind, alpha, dims, **kw):
    return SweepConfig(
        kind=kind,
        dims=list(dims),
        ps=[1.0, 2.0, 4.0],
        js=[0, 1, 3, 7],
        modulus=Modulus.power(alpha),
        trials=100,
        seed=SEED,
        experiment_id=f"acceptance/{kind}/{alpha:g}",
        **kw,
    )


def _run_sweeps(kinds, dims, **kw):
    reports = {}
    with Timer() as t:
        for kind in kinds:
            for alpha in ALPHAS:
                reports[(kind, alpha)] = sweep(_config(kind, alpha, dims, **kw))
    return reports, t.elapsed


@pytest.fixture(scope="module")
def upper_sweeps():
    return _run_sweeps(("selfadjoint", "unitary"), (8, 16, 32, 64, 128))


@pytest.fixture(scope="module")
def variant_sweeps():
    return _run_sweeps(("normal", "tuple", "contraction"), (8, 16, 32, 64), maxdeg=32)


CELLS6 = [(k, a) for k in ("selfadjoint", "unitary") for a in ALPHAS]
CELLS7 = [(k, a) for k in ("normal", "tuple", "contraction") for a in ALPHAS]


def _growth_message(report):
    return ", ".join(f"{a}->{b}: {g:+.1%}" for a, b, g in report.growth())


def _cell_line(kind, alpha, report, ok):
    maxima = " ".join(f"{d}:{v:.3g}" for d, v in report.max_ratio_by_dim().items())
    verdict = "ok" if ok else "growth over 10%"
    return f"{kind} alpha={alpha:g}: max ratio {maxima}; growth {_growth_message(report)} [{verdict}]"


@pytest.mark.slow
@pytest.mark.acceptance("AC6")
@pytest.mark.parametrize("kind,alpha", CELLS6)
def test_ac6_ratio_bounded(upper_sweeps, kind, alpha):
    report = upper_sweeps[0][(kind, alpha)]
    r = report.column("ratio")
    assert len(r) == 100 * 5 * 3 * 4
    assert np.all(np.isfinite(r))
    assert report.max_ratio() < CAP


@pytest.mark.slow
@pytest.mark.acceptance("AC6")
@pytest.mark.parametrize("kind,alpha", CELLS6)
def test_ac6_ratio_growth(upper_sweeps, kind, alpha, acceptance_note):
    report = upper_sweeps[0][(kind, alpha)]
    ok = report.growth_ok(GROWTH_LIMIT)
    acceptance_note(_cell_line(kind, alpha, report, ok))
    assert ok, _growth_message(report)


@pytest.mark.slow
@pytest.mark.acceptance("AC6")
def test_ac6_runtime(upper_sweeps, acceptance_note):
    acceptance_note(f"sweep runtime {upper_sweeps[1]:.0f} s (budget 600 s)")
    assert upper_sweeps[1] < 600.0


@pytest.mark.slow
@pytest.mark.acceptance("AC7")
@pytest.mark.parametrize("kind,alpha", CELLS7)
def test_ac7_ratio_bounded(variant_sweeps, kind, alpha):
    report = variant_sweeps[0][(kind, alpha)]
    r = report.column("ratio")
    assert len(r) == 100 * 4 * 3 * 4
    assert np.all(np.isfinite(r))
    assert report.max_ratio() < CAP


@pytest.mark.slow
@pytest.mark.acceptance("AC7")
@pytest.mark.parametrize("kind,alpha", CELLS7)
def test_ac7_ratio_growth(variant_sweeps, kind, alpha, acceptance_note):
    report = variant_sweeps[0][(kind, alpha)]
    ok = report.growth_ok(GROWTH_LIMIT)
    acceptance_note(_cell_line(kind, alpha, report, ok))
    assert ok, _growth_message(report)


@pytest.mark.slow
@pytest.mark.acceptance("AC7")
def test_ac7_runtime(variant_sweeps, acceptance_note):
    acceptance_note(f"sweep runtime {variant_sweeps[1]:.0f} s (budget 300 s)")
    assert variant_sweeps[1] < 300.0


# -- constructions -----------------------------------------------------------


@pytest.mark.acceptance("AC8")
def test_ac8_converse_witnesses():
    with Timer() as t:
        cases = random_witnesses(100, SEED, tol=1e-12)
    worst = max(max(rec.deviations) for *_, rec in cases)
    assert len(cases) == 100
    assert worst <= 1e-12
    assert t.elapsed < 5.0


@pytest.fixture(scope="module")
def lower_table():
    with Timer() as t:
        table = verify_lower(Modulus.power(0.5), 1024, 4)
    return table, t.elapsed


@pytest.mark.acceptance("AC9")
def test_ac9_rank_one(lower_table):
    assert lower_table[0].rank_uv == 1


@pytest.mark.acceptance("AC9")
def test_ac9_tn_exchange(lower_table):
    table = lower_table[0]
    m = Modulus.power(0.5)
    assert [row[0] for row in table.tn] == [1, 2, 3, 4]
    for n, side, value, off, dev in table.tn:
        assert side == tn_side(n)
        assert value == m(4.0**-n)
        assert off == 0.0
        assert dev <= 1e-12


@pytest.mark.acceptance("AC9")
def test_ac9_lower_bound(lower_table):
    table, elapsed = lower_table
    assert len(table.rows) == 3 * 4**3
    for m_idx, s_m, bound, margin in table.rows:
        assert s_m >= bound - 1e-10, m_idx
    assert elapsed < 120.0


@pytest.mark.acceptance("AC10")
def test_ac10_rho_equations():
    rng = np.random.default_rng(SEED)
    z = np.exp(rng.uniform(-2, 2, 1024)) * np.exp(1j * rng.uniform(-np.pi, np.pi, 1024))
    assert np.abs(rho(z) + rho(1j * z) - 1.0).max() <= 1e-12
    assert np.abs(rho(np.conj(z)) - rho(z)).max() <= 1e-12


@pytest.mark.acceptance("AC10")
def test_ac10_line_transfer():
    cap = 2.0**20
    with Timer() as t:
        res = line_transfer(Modulus.power(0.5), 3, C_cap=cap)
    assert res.found and res.C <= cap
    assert len(res.singular_values) == tn_side(3)
    assert np.all(res.C * res.singular_values >= res.bounds - 1e-10)
    assert t.elapsed < 120.0


@pytest.mark.acceptance("AC11")
def test_ac11_modulus_calculus():
    xs = np.logspace(-4, 2, 200)
    with Timer() as t:
        for alpha in ALPHAS:
            m = Modulus.power(alpha)
            closed_star = xs**alpha / (1 - alpha)
            closed_sharp = xs**alpha * (1 / (1 - alpha) + 1 / alpha)
            quad_star = np.array([omega_star(m, x, method="quad") for x in xs])
            quad_sharp = np.array([omega_sharp(m, x, method="quad") for x in xs])
            assert np.max(np.abs(quad_star / closed_star - 1)) <= 1e-8
            assert np.max(np.abs(quad_sharp / closed_sharp - 1)) <= 1e-8
            assert np.max(np.abs(omega_star(m, xs) / closed_star - 1)) <= 1e-8
            assert np.all(m(xs) <= omega_star(m, xs))
    assert t.elapsed < 1.0
