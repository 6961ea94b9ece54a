"""Chain/pattern/horseshoe tests: exact rational geometry, frozen pattern
values, transition-matrix oracles."""

from __future__ import annotations

import math
from fractions import Fraction as FR

import pytest

from pseudosusp.chains import (ChainCover, ChainError, IntervalChain,
                               PatternError, PLMap, Rect, RenderStyle,
                               StretchPreconditionError, essential_seven_chain,
                               full_branch_middle_map, horseshoe_extract,
                               identity_pattern, kfold, pattern_validate,
                               refine_chain, refine_interval_chain,
                               render_chains, stretch_check, tent_map,
                               tent_seven_chain, transition_entropy,
                               uniform_seven_chain)


# ---------------------------------------------------------------------------
# patterns
# ---------------------------------------------------------------------------

def test_pattern_validate_examples():
    assert pattern_validate((1, 2, 3, 2, 1)).values == (1, 2, 3, 2, 1)
    assert pattern_validate((1, 1, 1)).values == (1, 1, 1)
    # the offending step is reported at its left endpoint
    with pytest.raises(PatternError) as err:
        pattern_validate((1, 3))
    assert err.value.index == 1


def test_kfold_three_exact():
    assert kfold(3).values == (1, 2, 3, 4, 5, 4, 3, 4, 5, 6, 7)


def test_kfold_five_structure():
    p = kfold(5)
    assert p.m == 15
    assert p.values[:5] == (1, 2, 3, 4, 5)
    assert p.values[-2:] == (6, 7)
    assert p.values[5:13] == (4, 3, 4, 5, 4, 3, 4, 5)


def test_kfold_even_rejected():
    with pytest.raises(ValueError):
        kfold(4)
    with pytest.raises(ValueError):
        kfold(1)


@pytest.mark.parametrize("k", [3, 5, 7, 9, 11, 13, 15, 17, 19, 21])
def test_kfold_combinatorics(k):
    p = kfold(k)
    assert p.m == 2 * k + 5
    assert p.values[0] == 1 and p.values[-1] == 7
    assert p.values[2 * k + 3] == 6
    assert sum(1 for v in p.values if v == 3) == (k + 1) // 2
    assert sum(1 for v in p.values if v == 5) == (k + 1) // 2
    pattern_validate(p.values, 7)  # unit steps throughout


# ---------------------------------------------------------------------------
# PL maps
# ---------------------------------------------------------------------------

def test_plmap_eval_image_preimage():
    t = tent_map()
    assert t(FR(1, 4)) == FR(1, 2)
    assert t.image((FR(1, 4), FR(3, 4))) == (FR(1, 2), FR(1))
    pre = t.preimages((FR(1, 2), FR(1)))
    assert pre == [(FR(1, 4), FR(3, 4))]


def test_plmap_compose_exact():
    t = tent_map()
    t2 = t.iterate(2)
    assert t2(FR(1, 8)) == FR(1, 2)
    assert t2(FR(3, 8)) == FR(1, 2)
    assert t2(FR(1, 4)) == FR(1)
    assert t2(FR(1, 2)) == FR(0)
    assert len(t2.breakpoints) == 5


def test_transition_entropy_oracles():
    assert transition_entropy(tent_map()) == pytest.approx(math.log(2), abs=1e-12)
    assert transition_entropy(full_branch_middle_map(3)) == pytest.approx(
        math.log(3), abs=1e-9)
    assert transition_entropy(full_branch_middle_map(5)) == pytest.approx(
        math.log(5), abs=1e-9)
    identity = PLMap(((FR(0), FR(0)), (FR(1), FR(1))))
    assert transition_entropy(identity) == pytest.approx(0.0, abs=1e-12)


# ---------------------------------------------------------------------------
# 1D chains and refinement
# ---------------------------------------------------------------------------

def test_interval_chain_tautness():
    uniform_seven_chain().validate_taut()
    bad = IntervalChain(((FR(0), FR(1, 2)), (FR(1, 4), FR(3, 4)),
                         (FR(2, 5), FR(1))))  # links 1,3 overlap
    with pytest.raises(ChainError):
        bad.validate_taut()


def test_refine_interval_chain_containment():
    chain = uniform_seven_chain()
    child = refine_interval_chain(chain, kfold(3))
    assert len(child.links) == 11
    f = kfold(3)
    for i in range(1, 12):
        lo, hi = child.links[i - 1]
        plo, phi = chain.links[f(i) - 1]
        assert plo <= lo < hi <= phi
    assert child.links[0][0] >= chain.links[0][0]
    assert child.links[10][1] <= chain.links[6][1]


def test_refine_interval_chain_identity_is_shrunk_copy():
    chain = uniform_seven_chain()
    child = refine_interval_chain(chain, identity_pattern(7))
    assert len(child.links) == 7
    for (lo, hi), (plo, phi) in zip(child.links, chain.links):
        assert plo <= lo < hi <= phi


def test_refine_rejects_out_of_range_pattern():
    small = IntervalChain(((FR(0), FR(1, 2)), (FR(2, 5), FR(1)),))
    with pytest.raises(ChainError):
        refine_interval_chain(small, kfold(3))


# ---------------------------------------------------------------------------
# stretching
# ---------------------------------------------------------------------------

def test_stretch_three_branch_standard_m1():
    s = stretch_check(full_branch_middle_map(3), uniform_seven_chain())
    assert (s.stretches, s.exponent, s.orientation) == (True, 1, "standard")


def test_stretch_tent_tailored_chain_m2():
    s = stretch_check(tent_map(), tent_seven_chain())
    assert (s.stretches, s.exponent, s.orientation) == (True, 2, "swapped")


def test_stretch_identity_false():
    identity = PLMap(((FR(0), FR(0)), (FR(1), FR(1))))
    assert not stretch_check(identity, uniform_seven_chain(), 6).stretches


def test_stretch_rotation_like_false():
    # continuous PL surrogate of x + 1/3: images of middle links never land
    # inside an end link
    surrogate = PLMap(((FR(0), FR(1, 3)), (FR(2, 3), FR(1)), (FR(1), FR(0))))
    assert not stretch_check(surrogate, uniform_seven_chain(), 8).stretches


# ---------------------------------------------------------------------------
# horseshoe certificates
# ---------------------------------------------------------------------------

def test_horseshoe_three_branch_certifies():
    g = full_branch_middle_map(3)
    cert = horseshoe_extract(g, uniform_seven_chain(), 3, 5)
    assert cert.passed
    assert cert.nonempty == cert.expected == 729
    assert cert.exponent == 1
    assert abs(cert.entropy_bound - transition_entropy(g)) <= 1e-9
    assert len(cert.intervals) == 729
    # top-level family pairwise disjoint
    for a, b in zip(cert.slots, cert.slots[1:]):
        assert a[1] < b[0]


def test_horseshoe_five_branch_certifies():
    g = full_branch_middle_map(5)
    cert = horseshoe_extract(g, uniform_seven_chain(), 5, 4)
    assert cert.passed and cert.nonempty == 5 ** 5
    assert abs(cert.entropy_bound - transition_entropy(g)) <= 1e-9


def test_horseshoe_tent_negative_with_named_branch():
    cert = horseshoe_extract(tent_map(), tent_seven_chain(), 3, 5)
    assert not cert.passed
    assert cert.failing_word == (1, 1)
    assert cert.nonempty < cert.expected
    assert "empty branch" in cert.summary()


def test_horseshoe_bound_never_exceeds_oracle():
    for k in (3, 5):
        g = full_branch_middle_map(k)
        cert = horseshoe_extract(g, uniform_seven_chain(), k, 3)
        assert cert.passed
        assert cert.entropy_bound <= transition_entropy(g) + 1e-9


def test_horseshoe_requires_stretch():
    identity = PLMap(((FR(0), FR(0)), (FR(1), FR(1))))
    with pytest.raises(StretchPreconditionError):
        horseshoe_extract(identity, uniform_seven_chain(), 3, 2)


def test_horseshoe_rejects_even_k():
    with pytest.raises(ValueError):
        horseshoe_extract(full_branch_middle_map(3), uniform_seven_chain(), 4, 2)


def test_horseshoe_counts_are_full_powers():
    g = full_branch_middle_map(3)
    for depth in (0, 1, 2, 3):
        cert = horseshoe_extract(g, uniform_seven_chain(), 3, depth)
        assert cert.passed and cert.nonempty == 3 ** (depth + 1)


# ---------------------------------------------------------------------------
# 2D chain covers
# ---------------------------------------------------------------------------

def test_essential_chain_builds_taut():
    ec = essential_seven_chain()
    assert ec.taut and ec.essential and len(ec.links) == 7


def test_refine_chain_three_levels():
    ec = essential_seven_chain()
    pat = kfold(3)
    levels = [ec]
    for _ in range(3):
        levels.append(refine_chain(levels[-1], pat))
    for parent, child in zip(levels, levels[1:]):
        assert len(child.links) == 11
        for i in range(1, pat.m + 1):
            assert parent.links[pat(i) - 1].contains(child.links[i - 1])
    assert levels[1].taut  # first-level folding fits tautly in 2D


def test_refine_chain_rejects_large_pattern():
    small = ChainCover.build([Rect((FR(0), FR(1)), (FR(0), FR(3, 10))),
                              Rect((FR(0), FR(1)), (FR(1, 4), FR(11, 20)))])
    with pytest.raises(ChainError):
        refine_chain(small, kfold(3))


def test_chain_cover_rejects_wide_links():
    with pytest.raises(ChainError):
        ChainCover.build([Rect((FR(0), FR(1)), (FR(0), FR(1, 2))),
                          Rect((FR(0), FR(1)), (FR(2, 5), FR(4, 5)))])


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def test_render_counts_and_layers():
    ec = essential_seven_chain()
    svg = render_chains([ec])
    assert svg.count("<polygon") == 7
    lvl1 = refine_chain(ec, kfold(3))
    lvl2 = refine_chain(lvl1, kfold(3))
    svg3 = render_chains([ec, lvl1, lvl2])
    assert svg3.count("<polygon") == 29
    assert svg3.count("<g id=") == 3
    assert 'id="level2-link10"' in svg3


def test_render_empty_is_valid_svg():
    svg = render_chains([])
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")


def test_render_deterministic():
    ec = essential_seven_chain()
    assert render_chains([ec], RenderStyle()) == render_chains([ec], RenderStyle())
