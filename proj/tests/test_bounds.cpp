#include <doctest.h>

#include <array>
#include <cmath>

#include "orbitlab/bounds.hpp"

using namespace orbitlab;

namespace {
RepresentationSpec sign_spec(int n) {
    RepresentationSpec spec;
    for (int i = 0; i < n; ++i) spec.blocks.push_back({1, 1});
    return spec;
}
} // namespace

TEST_CASE("verdict_real worked examples") {
    SUBCASE("sign-change ambiguity under affine translates recovers exactly") {
        // K = N = 8, M = 3, 2M < N
        const auto v = verdict_real(sign_spec(8), 3, VerdictClass::Aff, false);
        CHECK(v.scope == Scope::all_points);
        CHECK(v.ambiguity == Ambiguity::exact);
        CHECK(v.effective == 8);
    }
    SUBCASE("K equal to M fails every threshold") {
        // K = 2 for two sign blocks; M = 2
        const auto v = verdict_real(sign_spec(2), 2, VerdictClass::GL, false);
        CHECK(v.scope == Scope::none);
        CHECK(v.margin <= 0);
    }
    SUBCASE("dihedral N=8 orthogonal class at M=1") {
        const auto spec = dihedral_decomposition(8);
        const auto v = verdict_real(spec, 1, VerdictClass::O, false);
        CHECK(v.effective == 5);
        CHECK(v.scope == Scope::all_points);  // 5 > 2*1+2
        CHECK(v.ambiguity == Ambiguity::up_to_sign);
    }
    SUBCASE("connectedness lowers the orthogonal thresholds") {
        // one (4,2) block: dim 8, orbit dim O(4) - dim O(2) = 5, K = 3
        RepresentationSpec spec{{{4, 2}}};
        CHECK(effective_dim(spec).effective == 3);
        CHECK(verdict_real(spec, 1, VerdictClass::O, false).scope == Scope::none);
        CHECK(verdict_real(spec, 1, VerdictClass::O, true).scope == Scope::generic_point);
        CHECK(orbits_connected(spec));
        CHECK(verdict_real(spec, 1, VerdictClass::O).scope == Scope::generic_point);
    }
}

TEST_CASE("verdict scope is monotone in the prior dimension") {
    Rng rng(83);
    auto scope_rank = [](Scope s) {
        return s == Scope::all_points ? 2 : (s == Scope::generic_point ? 1 : 0);
    };
    for (int t = 0; t < 100; ++t) {
        RepresentationSpec spec;
        const int blocks = 1 + static_cast<int>(rng.uniform_index(4));
        for (int b = 0; b < blocks; ++b)
            spec.blocks.push_back({1 + static_cast<int>(rng.uniform_index(5)),
                                   1 + static_cast<int>(rng.uniform_index(4))});
        const auto cls = std::array{VerdictClass::GL, VerdictClass::Aff,
                                    VerdictClass::O}[rng.uniform_index(3)];
        int prev = 2;
        for (int M = 0; M <= 12; ++M) {
            const int rank = scope_rank(verdict_real(spec, M, cls).scope);
            CHECK(rank <= prev);
            prev = rank;
        }
    }
}

TEST_CASE("structural ambiguity flags") {
    const auto spec = dihedral_decomposition(6);
    CHECK(verdict_real(spec, 1, VerdictClass::GL).ambiguity == Ambiguity::up_to_sign);
    CHECK(verdict_real(spec, 1, VerdictClass::O).ambiguity == Ambiguity::up_to_sign);
    CHECK(verdict_real(spec, 1, VerdictClass::Aff).ambiguity == Ambiguity::exact);
    CHECK(verdict_complex(RepresentationSpec{{{2, 1}}}, 0, VerdictClass::U).ambiguity ==
          Ambiguity::up_to_phase);
    CHECK(verdict_complex(RepresentationSpec{{{2, 1}}}, 0, VerdictClass::Aff).ambiguity ==
          Ambiguity::exact);
    CHECK(verdict_phase_retrieval(8, 2, VerdictClass::GL).ambiguity == Ambiguity::up_to_sign);
    CHECK(verdict_phase_retrieval(8, 2, VerdictClass::Aff).ambiguity == Ambiguity::exact);
}

TEST_CASE("verdict_complex dimension counts") {
    SUBCASE("one-dimensional block") {
        const auto v = verdict_complex(RepresentationSpec{{{1, 1}}}, 0, VerdictClass::GL);
        CHECK(v.dim_v == 2);
        CHECK(v.orbit_dim == 1);
        CHECK(v.effective == 1);
    }
    SUBCASE("a generic vector in C^2 has a three-dimensional unitary orbit") {
        const auto v = verdict_complex(RepresentationSpec{{{2, 1}}}, 0, VerdictClass::GL);
        CHECK(v.dim_v == 4);
        CHECK(v.orbit_dim == 3);  // dim U(2) - dim U(1)
        CHECK(v.effective == 1);
    }
    SUBCASE("unitary class uses the connected thresholds") {
        // K = 3: blocks (1,1) x 3
        const RepresentationSpec spec{{{1, 1}, {1, 1}, {1, 1}}};
        const auto v = verdict_complex(spec, 0, VerdictClass::U);
        CHECK(v.effective == 3);
        CHECK(v.connected_orbits);
        CHECK(v.generic_threshold == 2);
        CHECK(v.all_threshold == 2);
        CHECK(v.scope == Scope::all_points);
    }
}

TEST_CASE("verdict_phase_retrieval inequalities as printed") {
    SUBCASE("N = 2M boundary holds") {
        const auto v = verdict_phase_retrieval(8, 4, VerdictClass::GL);
        CHECK(v.scope == Scope::generic_point);
        CHECK(v.margin == 0);
    }
    SUBCASE("orthogonal all-points boundary") {
        const auto v = verdict_phase_retrieval(16, 3, VerdictClass::O);
        CHECK(v.scope == Scope::all_points);
        CHECK(v.margin == 0);
    }
    SUBCASE("small N fails everything") {
        CHECK(verdict_phase_retrieval(4, 3, VerdictClass::GL).scope == Scope::none);
        CHECK(verdict_phase_retrieval(4, 3, VerdictClass::Aff).scope == Scope::none);
        CHECK(verdict_phase_retrieval(4, 3, VerdictClass::O).scope == Scope::none);
    }
    SUBCASE("GL generic threshold matches K > M through the decomposition (even N)") {
        for (int N = 4; N <= 20; N += 2)
            for (int M = 0; M <= N; ++M) {
                const bool ineq = N >= 2 * M;
                const int K = effective_dim(dihedral_decomposition(N)).effective;
                CHECK(ineq == (K > M));
            }
    }
}

TEST_CASE("verdict_cryoem") {
    SUBCASE("closed formula matches effective_dim whenever R >= 2L+1") {
        for (int L = 0; L <= 6; ++L)
            for (int R = 2 * L + 1; R <= 20; ++R) {
                const auto cv = verdict_cryoem(L, R, 0, VerdictClass::GL);
                CHECK(cv.closed_form);
                CHECK(cv.closed_form_k == effective_dim(cryoem_spec(L, R)).effective);
            }
    }
    SUBCASE("L=2 R=5 sweep around K=32") {
        const auto cv = verdict_cryoem(2, 5, 20, VerdictClass::GL);
        CHECK(cv.verdict.effective == 32);
        CHECK(cv.verdict.scope == Scope::generic_point);  // 32 > 20 but 32 <= 40
        CHECK(verdict_cryoem(2, 5, 15, VerdictClass::GL).verdict.scope == Scope::all_points);
    }
    SUBCASE("tiny model is affine-exact") {
        const auto cv = verdict_cryoem(0, 1, 0, VerdictClass::Aff);
        CHECK(cv.verdict.scope == Scope::all_points);
        CHECK(cv.verdict.ambiguity == Ambiguity::exact);
    }
    SUBCASE("K over N approaches two thirds") {
        const auto cv = verdict_cryoem(10, 20, 0, VerdictClass::GL);
        const double ratio = static_cast<double>(cv.verdict.effective) / cv.verdict.dim_v;
        CHECK(std::abs(ratio - 2.0 / 3.0) <= 0.07);
    }
    SUBCASE("below the radial precondition the raw spec is used and flagged") {
        const auto cv = verdict_cryoem(3, 2, 0, VerdictClass::GL);
        CHECK_FALSE(cv.closed_form);
        CHECK(cv.verdict.effective == effective_dim(cryoem_spec(3, 2)).effective);
    }
}

TEST_CASE("verdict_gram") {
    SUBCASE("N=3 R=1") {
        const auto v = verdict_gram(3, 1, 0, VerdictClass::GL);
        CHECK(v.effective == 1);
        CHECK(v.scope == Scope::all_points);  // 1 > 0
    }
    SUBCASE("N=2 R=2") {
        const auto v = verdict_gram(2, 2, 1, VerdictClass::GL);
        CHECK(v.orbit_dim == 1);
        CHECK(v.effective == 3);
        CHECK(v.scope == Scope::all_points);  // 3 > 2
    }
    SUBCASE("prior dimension at K gives none") {
        const auto v = verdict_gram(3, 1, 1, VerdictClass::GL);
        CHECK(v.scope == Scope::none);
    }
}

TEST_CASE("verdict_rowsort") {
    SUBCASE("Corollary-style bound") {
        const auto v = verdict_rowsort(2, 3, 2);
        CHECK(v.separating_all);  // 2 < 3
        CHECK(v.separating_generic);
    }
    SUBCASE("between the two bounds") {
        const auto v = verdict_rowsort(2, 3, 3);
        CHECK_FALSE(v.separating_all);
        CHECK(v.separating_generic);  // 3 < 6
    }
    SUBCASE("zero-dimensional prior always separates") {
        const auto v = verdict_rowsort(4, 4, 0);
        CHECK(v.separating_all);
        CHECK(v.separating_generic);
    }
}
