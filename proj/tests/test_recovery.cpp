#include <doctest.h>

#include <Eigen/SVD>
#include <cmath>
#include <numbers>

#include "orbitlab/recovery.hpp"

using namespace orbitlab;

namespace {

/// Best orthogonal alignment residual (Procrustes oracle).
double procrustes_residual(const Matrix& source, const Matrix& target) {
    Eigen::JacobiSVD<Matrix> svd(target * source.transpose(),
                                 Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Matrix Q = svd.matrixU() * svd.matrixV().transpose();
    return (Q * source - target).norm();
}

} // namespace

TEST_CASE("canonical_factor") {
    SUBCASE("zero blocks") {
        RepresentationSpec spec{{{2, 2}}};
        const GramBlocks B{spec, {Matrix::Zero(2, 2)}};
        CHECK(canonical_factor(B).blocks[0].cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("identity gram gives an orthogonal factor") {
        RepresentationSpec spec{{{3, 3}}};
        const GramBlocks B{spec, {Matrix::Identity(3, 3)}};
        const Signal x = canonical_factor(B);
        CHECK((x.blocks[0].transpose() * x.blocks[0] - Matrix::Identity(3, 3))
                  .cwiseAbs()
                  .maxCoeff() <= 1e-10);
    }
    SUBCASE("factor reproduces the gram blocks and matches up to an orthogonal factor") {
        Rng rng(101);
        const RepresentationSpec spec{{{2, 2}, {3, 1}, {4, 3}}};
        for (int t = 0; t < 25; ++t) {
            const Signal x = gaussian_signal(spec, rng);
            const GramBlocks B = gram_blocks(x);
            const Signal xhat = canonical_factor(B);
            for (size_t l = 0; l < spec.blocks.size(); ++l) {
                const Matrix G = xhat.blocks[l].transpose() * xhat.blocks[l];
                CHECK((G - B.blocks[l]).norm() <= 1e-10 * (1.0 + B.blocks[l].norm()));
                CHECK(procrustes_residual(xhat.blocks[l], x.blocks[l]) <= 1e-8);
            }
        }
    }
    SUBCASE("deterministic given the measurement") {
        Rng rng(103);
        const RepresentationSpec spec{{{3, 2}}};
        const Signal x = gaussian_signal(spec, rng);
        const GramBlocks B = gram_blocks(x);
        const Signal a = canonical_factor(B);
        const Signal b = canonical_factor(B);
        CHECK((a.flatten() - b.flatten()).norm() == 0.0);
    }
    SUBCASE("rank above the irreducible dimension is infeasible") {
        RepresentationSpec spec{{{1, 2}}};
        GramBlocks B{spec, {Matrix::Identity(2, 2)}};  // rank 2 > N = 1
        CHECK_THROWS_AS(canonical_factor(B), InfeasibleGramError);
    }
}

TEST_CASE("sign comparator") {
    Rng rng(107);
    const RepresentationSpec spec{{{3, 1}}};
    const Signal x = gaussian_signal(spec, rng);
    Signal mx = x;
    mx.blocks[0] = -mx.blocks[0];
    CHECK(same_up_to_sign(x, x, 1e-9));
    CHECK(same_up_to_sign(x, mx, 1e-9));
    CHECK_FALSE(same_up_to_sign(x, mx, 1e-9, /*allow_sign=*/false));
    Signal y = x;
    y.blocks[0](0, 0) += 1.0;
    CHECK_FALSE(same_up_to_sign(x, y, 1e-3));
}

TEST_CASE("orbit_search_enumerate") {
    Rng rng(109);
    SUBCASE("point prior containing the signal") {
        RepresentationSpec spec;
        for (int i = 0; i < 4; ++i) spec.blocks.push_back({1, 1});
        const Signal x = gaussian_signal(spec, rng);
        const PointSetPrior prior({x.flatten()});
        const auto res =
            orbit_search_enumerate(sign_change_elements(spec), x, prior, SearchOptions{});
        CHECK(res.status == RecoveryStatus::unique_up_to_sign);
        REQUIRE(res.candidates.size() == 1);
        CHECK((res.candidates[0].signal.flatten() - x.flatten()).norm() <= 1e-12);
    }
    SUBCASE("sign-change group with a generic subspace prior keeps only +-x") {
        RepresentationSpec spec;
        for (int i = 0; i < 10; ++i) spec.blocks.push_back({1, 1});
        const SubspacePrior prior(random_subspace_basis(10, 2, rng));
        const Vector xv = prior.sample(rng);
        const Signal x = Signal::unflatten(spec, xv);
        const Signal xhat = canonical_factor(gram_blocks(x));
        const auto res =
            orbit_search_enumerate(sign_change_elements(spec), xhat, prior, SearchOptions{});
        CHECK(res.status == RecoveryStatus::unique_up_to_sign);
        REQUIRE_FALSE(res.candidates.empty());
        const Vector c = res.candidates[0].signal.flatten();
        CHECK(std::min((c - xv).norm(), (c + xv).norm()) <= 1e-8 * std::max(1.0, xv.norm()));
        CHECK(res.raw_candidates == 2);  // the two sign patterns mapping |x| onto +-x
    }
    SUBCASE("zero tolerance on perturbed input yields not_found") {
        RepresentationSpec spec{{{1, 1}, {1, 1}}};
        Signal x = gaussian_signal(spec, rng);
        Vector off = x.flatten();
        off(0) += 0.1;
        const PointSetPrior prior({off});
        SearchOptions opts;
        opts.tol_in = 0.0;
        const auto res = orbit_search_enumerate(sign_change_elements(spec), x, prior, opts);
        CHECK(res.status == RecoveryStatus::not_found);
        CHECK(res.candidates.empty());
    }
}

TEST_CASE("orbit_search_grid") {
    Rng rng(113);
    SUBCASE("product scan on a small dihedral spec finds only +-x") {
        const auto spec = dihedral_decomposition(6);
        const SubspacePrior prior(random_subspace_basis(6, 1, rng));
        const Vector xv = prior.sample(rng);
        const Signal x = Signal::unflatten(spec, xv);
        const Signal xhat = canonical_factor(gram_blocks(x));
        GridOptions opts;
        opts.delta = 2.0 * std::numbers::pi / 48;
        opts.budget = 1e8;  // (2*48)^2 * 4 fits
        const auto res = orbit_search_grid(xhat, prior, opts);
        CHECK(res.status == RecoveryStatus::unique_up_to_sign);
        REQUIRE_FALSE(res.candidates.empty());
        const Vector c = res.candidates[0].signal.flatten();
        CHECK(std::min((c - xv).norm(), (c + xv).norm()) <= 1e-6 * std::max(1.0, xv.norm()));
    }
    SUBCASE("full-space prior marks every grid point a candidate") {
        RepresentationSpec spec{{{2, 1}}};
        Signal x = Signal::zero(spec);
        x.blocks[0] << 1.0, 0.0;
        const SubspacePrior prior(Matrix::Identity(2, 2));
        GridOptions opts;
        opts.delta = 2.0 * std::numbers::pi / 16;
        const auto res = orbit_search_grid(x, prior, opts);
        CHECK(res.status == RecoveryStatus::ambiguous);
        CHECK(res.raw_candidates == res.points_scanned);
    }
    SUBCASE("over-budget product grid with an affine prior switches to the sphere scan") {
        const auto spec = dihedral_decomposition(8);
        const SubspacePrior prior(random_subspace_basis(8, 1, rng));
        const Vector xv = prior.sample(rng);
        const Signal x = Signal::unflatten(spec, xv);
        const Signal xhat = canonical_factor(gram_blocks(x));
        GridOptions opts;  // default delta 2pi/2000: (2*2000)^3 * 4 is over budget
        const auto res = orbit_search_grid(xhat, prior, opts);
        CHECK(res.note.find("sphere") != std::string::npos);
        CHECK(res.status == RecoveryStatus::unique_up_to_sign);
        REQUIRE_FALSE(res.candidates.empty());
        const Vector c = res.candidates[0].signal.flatten();
        CHECK(std::min((c - xv).norm(), (c + xv).norm()) <= 1e-6 * std::max(1.0, xv.norm()));
    }
    SUBCASE("over-budget grid without structure is a budget error") {
        const auto spec = dihedral_decomposition(8);
        const Signal x = gaussian_signal(spec, rng);
        const PointSetPrior prior({x.flatten()});
        GridOptions opts;
        CHECK_THROWS_AS(orbit_search_grid(x, prior, opts), GridBudgetError);
    }
    SUBCASE("blocks larger than two are rejected") {
        RepresentationSpec spec{{{3, 1}}};
        const Signal x = gaussian_signal(spec, rng);
        const PointSetPrior prior({x.flatten()});
        CHECK_THROWS_AS(orbit_search_grid(x, prior, GridOptions{}), std::invalid_argument);
    }
}

TEST_CASE("orbit_search_local") {
    Rng rng(127);
    SUBCASE("signal already in the prior converges immediately") {
        const auto spec = dihedral_decomposition(6);
        const Signal x = gaussian_signal(spec, rng);
        const PointSetPrior prior({x.flatten()});
        LocalOptions opts;
        opts.restarts = 1;  // the first restart starts at the identity
        Rng search_rng(1);
        const auto res = orbit_search_local(x, prior, opts, search_rng);
        CHECK(res.status == RecoveryStatus::unique_up_to_sign);
        CHECK(res.best_residual <= 1e-10);
    }
    SUBCASE("agrees with the grid oracle on dihedral instances") {
        const auto spec = dihedral_decomposition(6);
        for (int t = 0; t < 5; ++t) {
            const SubspacePrior prior(random_subspace_basis(6, 1, rng));
            const Vector xv = prior.sample(rng);
            const Signal x = Signal::unflatten(spec, xv);
            const Signal xhat = canonical_factor(gram_blocks(x));
            GridOptions gopts;
            gopts.delta = 2.0 * std::numbers::pi / 64;
            const auto grid = orbit_search_grid(xhat, prior, gopts);
            LocalOptions lopts;
            lopts.restarts = 32;
            Rng search_rng(1000 + t);
            const auto local = orbit_search_local(xhat, prior, lopts, search_rng);
            REQUIRE_FALSE(grid.candidates.empty());
            REQUIRE_FALSE(local.candidates.empty());
            // every local candidate appears in the oracle's list
            for (const auto& lc : local.candidates) {
                bool matched = false;
                for (const auto& gc : grid.candidates)
                    if (same_up_to_sign(lc.signal, gc.signal, 1e-3)) matched = true;
                CHECK(matched);
            }
            CHECK(grid.status == local.status);
        }
    }
}

TEST_CASE("recover end to end") {
    Rng rng(131);
    SUBCASE("noiseless gram with the enumerate oracle") {
        RepresentationSpec spec;
        for (int i = 0; i < 8; ++i) spec.blocks.push_back({1, 1});
        const SubspacePrior prior(random_subspace_basis(8, 2, rng));
        const Vector xv = prior.sample(rng);
        const Signal x = Signal::unflatten(spec, xv);
        RecoverConfig cfg;
        cfg.method = RecoveryMethod::enumerate;
        const auto res = recover(gram_blocks(x), prior, cfg);
        CHECK(res.status == RecoveryStatus::unique_up_to_sign);
        REQUIRE_FALSE(res.candidates.empty());
        const Vector c = res.candidates[0].signal.flatten();
        CHECK(std::min((c - xv).norm(), (c + xv).norm()) <= 1e-8 * std::max(1.0, xv.norm()));
        CHECK(res.candidates[0].gram_error <= 1e-10);
    }
    SUBCASE("measurement from a point outside the prior is not found") {
        RepresentationSpec spec;
        for (int i = 0; i < 6; ++i) spec.blocks.push_back({1, 1});
        const SubspacePrior prior(random_subspace_basis(6, 2, rng));
        const Signal x = gaussian_signal(spec, rng);  // not in the prior
        RecoverConfig cfg;
        cfg.method = RecoveryMethod::enumerate;
        cfg.enumerate_opts.tol_in = 1e-8;
        const auto res = recover(gram_blocks(x), prior, cfg);
        CHECK(res.status == RecoveryStatus::not_found);
    }
    SUBCASE("affine-translated prior resolves the sign") {
        RepresentationSpec spec;
        for (int i = 0; i < 8; ++i) spec.blocks.push_back({1, 1});
        auto base = std::make_shared<SubspacePrior>(random_subspace_basis(8, 2, rng));
        const auto prior = std::make_shared<TranslatedPrior>(
            base, sample_transform(TransformClass::Aff, 8, rng));
        const Vector xv = prior->sample(rng);
        const Signal x = Signal::unflatten(spec, xv);
        RecoverConfig cfg;
        cfg.method = RecoveryMethod::enumerate;
        const auto res = recover(gram_blocks(x), *prior, cfg);
        CHECK(res.status == RecoveryStatus::unique_up_to_sign);
        REQUIRE(res.candidates.size() == 1);
        // only +x lies in the affine translate
        CHECK((res.candidates[0].signal.flatten() - xv).norm() <=
              1e-7 * std::max(1.0, xv.norm()));
    }
    SUBCASE("second-moment input path") {
        Rng noise_rng(137);
        const DataGroupSpec G = CyclicGroup{8};
        const auto spec = isotypic_spec(G);
        auto base = std::make_shared<SubspacePrior>(random_subspace_basis(8, 1, rng));
        const auto prior =
            std::make_shared<TranslatedPrior>(base, sample_transform(TransformClass::O, 8, rng));
        const Vector x_coef = prior->sample(rng);
        const Vector x_ambient = isotypic_basis(G) * x_coef;
        const auto est = empirical_second_moment(G, x_ambient, 200000, 0.0, noise_rng);
        RecoverConfig cfg;
        cfg.method = RecoveryMethod::grid;
        cfg.grid.delta = 2.0 * std::numbers::pi / 512;
        cfg.grid.search.tol_in = 0.5 * x_coef.norm();
        const auto res = recover(est, G, *prior, cfg);
        REQUIRE_FALSE(res.candidates.empty());
        const Vector c = res.candidates[0].signal.flatten();
        const double err = std::min((c - x_coef).norm(), (c + x_coef).norm()) / x_coef.norm();
        CHECK(err <= 0.05);
    }
}
