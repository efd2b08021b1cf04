import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thetalab.fuchsian import (
    NONELEMENTARY_PRESETS,
    PRESETS,
    BudgetExceeded,
    FuchsianGroup,
    cyclic_group,
    distance_to_boundary,
    domain_circles,
    enumerate_words,
    group_from_spec,
    in_fundamental_domain,
    isometric_circle,
    iter_shells,
    load_group,
    pairing_map,
    preset,
    punctured_torus,
    schottky_by_length,
    schottky_from_pairs,
    systole_upper_bound,
    trivial_group,
    validate_schottky,
    word_count,
    word_table,
)
from thetalab.moebius import (
    MoebiusMap,
    apply,
    classify,
    compose,
    derivative,
    inverse,
    to_disk,
    translation_length,
)

SCHOTTKY_PRESETS = ("schottky-wide", "schottky-L4", "schottky-L2", "schottky-L1")


def random_disk_points(n, seed=0, rmax=0.999):
    rng = np.random.default_rng(seed)
    r = rmax * np.sqrt(rng.random(n))
    return r * np.exp(2j * np.pi * rng.random(n))


# -- words ------------------------------------------------------------------------

@pytest.mark.parametrize("N,count", [(0, 1), (1, 5), (2, 17), (3, 53)])
def test_word_counts_rank2(N, count):
    G = preset("schottky-wide")
    assert len(enumerate_words(G, N)) == count == word_count(2, N)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.integers(0, 4))
def test_word_count_closed_form(rank, N):
    G = schottky_from_pairs(0.1, [(2 * math.pi * j / rank, 2 * math.pi * j / rank + 0.6) for j in range(rank)])
    words = enumerate_words(G, N)
    assert len(words) == 1 + sum(2 * rank * (2 * rank - 1) ** (j - 1) for j in range(1, N + 1))
    assert len({w.letters for w in words}) == len(words)


def test_words_are_reduced_and_products():
    G = preset("schottky-wide")
    for w in enumerate_words(G, 4):
        assert all(a != -b for a, b in zip(w.letters, w.letters[1:]))
        assert np.allclose(w.matrix.matrix(), G.word_matrix(w.letters).matrix(), atol=1e-10 * max(1, np.abs(w.matrix.matrix()).max()))


def test_enumeration_is_lexicographic_preorder():
    G = preset("schottky-wide")
    words = enumerate_words(G, 3)
    assert words[0].letters == ()
    assert [w.letters for w in words[:4]] == [(), (1,), (1, 1), (1, 1, 1)]


@pytest.mark.parametrize("name", ["schottky-wide", "schottky-L1", "punctured-torus"])
def test_matrices_pairwise_distinct(name):
    G = preset(name)
    t = word_table(G, 5)
    keys = {tuple(np.round(np.concatenate([m.real, m.imag]) / 1e-8).astype(np.int64)) for m in t.mats}
    assert len(keys) == len(t)


def test_budget_error_reports_partial_count():
    G = preset("schottky-wide")
    with pytest.raises(BudgetExceeded, match="budget") as exc:
        word_table(G, 6, cap=100)
    assert exc.value.partial_count == 100


def test_shells_match_word_table():
    G = preset("schottky-L2")
    t = word_table(G, 5)
    for n, m in enumerate(iter_shells(G, 5)):
        assert np.allclose(m, t.mats[t.length == n], rtol=1e-14, atol=1e-20)


def test_shells_respect_cap():
    G = preset("schottky-wide")
    shells = []
    with pytest.raises(BudgetExceeded):
        for m in iter_shells(G, None, cap=60):
            shells.append(m)
    assert sum(len(m) for m in shells) == 53


# -- isometric circles -------------------------------------------------------------

def test_isometric_circle_absent():
    with pytest.raises(ValueError, match="no isometric circle"):
        isometric_circle(MoebiusMap(2, 0, 0, 0.5))


def test_isometric_circle_inversion():
    c, r = isometric_circle(MoebiusMap(0, -1, 1, 0))
    assert abs(c) < 1e-15 and r == pytest.approx(1.0)


@settings(max_examples=50)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.2, 3), st.floats(0, 2 * math.pi))
def test_derivative_is_unimodular_on_isometric_circle(b, c, a, t):
    if abs(c) < 1e-3:
        return
    m = MoebiusMap(a, b, c, (1 + b * c) / a)
    center, r = isometric_circle(m)
    z = center + r * complex(math.cos(t), math.sin(t))
    assert abs(derivative(m, z)) == pytest.approx(1.0, abs=1e-10)


# -- Schottky validation -------------------------------------------------------------

@pytest.mark.parametrize("name", SCHOTTKY_PRESETS)
def test_presets_are_schottky(name):
    rep = validate_schottky(preset(name))
    assert rep.ok, rep.violations


def test_elliptic_generator_rejected():
    t = 0.3
    G = FuchsianGroup((MoebiusMap(math.cos(t), -math.sin(t), math.sin(t), math.cos(t)),))
    rep = validate_schottky(G)
    assert not rep.ok
    assert any("not hyperbolic" in v for v in rep.violations)


def test_identical_generators_rejected():
    g = pairing_map(math.pi, 0.0, 0.2)
    rep = validate_schottky(FuchsianGroup((g, g)))
    assert any("coincide" in v for v in rep.violations)


def test_overlapping_circles_rejected():
    G = schottky_from_pairs(0.5, ((0.0, 0.3), (math.pi, 2.0)))
    assert not validate_schottky(G).ok


def test_pairing_map_pairs_circles():
    g = pairing_map(1.0, 2.5, 0.3)
    c_in, r_in = isometric_circle(g)
    c_out, r_out = isometric_circle(inverse(g))
    assert c_in / abs(c_in) == pytest.approx(complex(math.cos(1.0), math.sin(1.0)))
    assert c_out / abs(c_out) == pytest.approx(complex(math.cos(2.5), math.sin(2.5)))
    assert r_in == pytest.approx(0.3) and r_out == pytest.approx(0.3)
    # a point on the first circle inside the disk lands on the second circle
    z = c_in + r_in * (-c_in / abs(c_in))
    assert abs(abs(apply(g, z) - c_out) - r_out) < 1e-12


@pytest.mark.parametrize("L", [4.0, 2.0, 1.0, 0.5])
def test_trend_family_has_requested_length(L):
    G = schottky_by_length(L)
    assert translation_length(G.generators[0]) == pytest.approx(L, abs=1e-12)
    assert validate_schottky(G).ok


# -- fundamental domain ----------------------------------------------------------------

def test_origin_in_domain():
    for name in PRESETS:
        assert in_fundamental_domain(preset(name), 0.0)


def test_inside_circle_not_in_domain():
    G = preset("schottky-wide")
    c, r = isometric_circle(G.generators[0])
    z = c * (1 - 0.5 * r / abs(c))  # between the circle center and the origin, inside the circle
    assert abs(z - c) < r and abs(z) < 1
    assert not in_fundamental_domain(G, z)


@pytest.mark.parametrize("name", ["schottky-wide", "schottky-L2", "punctured-torus"])
def test_interior_points_not_mapped_back(name):
    G = preset(name)
    z = random_disk_points(400, seed=1, rmax=0.95)
    z = z[in_fundamental_domain(G, z) & (distance_to_boundary(G, z) > 1e-6)]
    assert len(z) > 20
    for w in word_table(G, 3).mats[1:]:
        m = MoebiusMap(*w)
        assert not np.any(in_fundamental_domain(G, apply(m, z)))


@pytest.mark.parametrize("name,N", [("schottky-wide", 7), ("schottky-L4", 7)])
def test_tiling_brute_force(name, N):
    """Sample points are carried into F by exactly one enumerated word."""
    G = preset(name)
    z = random_disk_points(300, seed=2, rmax=0.9)
    t = word_table(G, N)
    hits = np.zeros(len(z), dtype=int)
    near = np.zeros(len(z), dtype=bool)
    for w in t.mats:
        m = MoebiusMap(*w)
        img = apply(m, z)
        inside = in_fundamental_domain(G, img)
        hits += inside
        near |= inside & (distance_to_boundary(G, img) < 1e-9)
    assert np.all(hits[~near] == 1)


def test_punctured_torus_data():
    G = punctured_torus()
    a, b = G.generators
    comm = compose(compose(a, b), compose(inverse(a), inverse(b)))
    assert classify(comm) == "parabolic"
    assert classify(a) == classify(b) == "hyperbolic"
    centers, radii = domain_circles(G)
    assert len(radii) == 8
    # circles meet the boundary at right angles
    assert np.allclose(np.abs(centers) ** 2, 1 + radii ** 2)


def test_punctured_torus_domain_has_area_2pi():
    """Hyperbolic area of the stored Ford domain is 2 pi (genus 1, one cusp)."""
    G = punctured_torus()
    n = 1200
    r = (np.arange(n) + 0.5) / n * 0.99999
    t = (np.arange(2 * n) + 0.5) / (2 * n) * 2 * np.pi
    R, T = np.meshgrid(r, t, indexing="ij")
    z = R * np.exp(1j * T)
    dens = 4.0 / (1 - R ** 2) ** 2 * R * (0.99999 / n) * (2 * np.pi / (2 * n))
    area = float(np.sum(dens * in_fundamental_domain(G, z)))
    assert area == pytest.approx(2 * math.pi, rel=2e-2)


# -- systole ------------------------------------------------------------------------------

def test_cyclic_systole():
    assert systole_upper_bound(cyclic_group(), 3) == pytest.approx(2 * math.log(2), abs=1e-12)


def test_systole_N1_is_min_generator_length():
    G = preset("schottky-L2")
    expected = min(translation_length(g) for g in G.generators)
    assert systole_upper_bound(G, 1) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("name", NONELEMENTARY_PRESETS)
def test_systole_monotone_in_depth(name):
    G = preset(name)
    vals = [systole_upper_bound(G, N) for N in range(1, 5)]
    assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("name", NONELEMENTARY_PRESETS)
def test_systole_conjugation_invariant(name):
    G = preset(name)
    h = to_disk(MoebiusMap(1.3, 0.4, 0.2, (1 + 0.4 * 0.2) / 1.3))
    assert systole_upper_bound(G.conjugated(h), 3) == pytest.approx(systole_upper_bound(G, 3), abs=1e-9)


def test_systole_requires_hyperbolic():
    with pytest.raises(ValueError):
        systole_upper_bound(trivial_group(), 3)


@pytest.mark.parametrize("L", [4.0, 2.0, 1.0])
def test_trend_presets_systole(L):
    assert systole_upper_bound(preset(f"schottky-L{int(L)}"), 3) == pytest.approx(L, abs=1e-9)


# -- specs ----------------------------------------------------------------------------

def test_spec_roundtrip(tmp_path):
    G = preset("schottky-L2")
    path = tmp_path / "g.json"
    path.write_text(json.dumps(G.to_spec()))
    H = load_group(str(path))
    for g, h in zip(G.generators, H.generators):
        assert np.allclose(g.matrix(), h.matrix(), atol=1e-14)


def test_halfplane_spec():
    spec = {"model": "halfplane", "generators": [[[2, 0], [0, 0.5]]], "kind": "schottky"}
    G = group_from_spec(spec)
    assert G.generators[0] == to_disk(MoebiusMap(2, 0, 0, 0.5))


def test_preset_spec():
    G = group_from_spec({"kind": "preset:punctured-torus"})
    assert G.kind == "punctured-torus"


def test_unknown_group():
    with pytest.raises(ValueError):
        load_group("no-such-thing")
