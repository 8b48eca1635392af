#include <doctest.h>

#include <cmath>

#include "orbitlab/priors.hpp"

using namespace orbitlab;

TEST_CASE("grid prior") {
    const GridPrior grid(2, 2);  // {-1, 1}^2
    SUBCASE("projection rounds per axis") {
        Vector v(2);
        v << 0.9, -1.2;
        const auto p = grid.project(v);
        CHECK(p.point(0) == 1.0);
        CHECK(p.point(1) == -1.0);
        CHECK(p.distance == doctest::Approx(std::sqrt(0.01 + 0.04)));
    }
    SUBCASE("membership of off-grid points") {
        Vector v(2);
        v << 0.5, 1.0;
        CHECK_FALSE(membership(grid, v, 1e-6));
    }
    SUBCASE("three points per axis include zero") {
        const GridPrior g3(3, 2);
        CHECK(g3.axis_values()[1] == 0.0);
        CHECK(g3.finite_points(100)->size() == 9);
    }
}

TEST_CASE("subspace prior") {
    Rng rng(41);
    const SubspacePrior prior(random_subspace_basis(10, 3, rng));
    SUBCASE("samples lie in the subspace") {
        for (int t = 0; t < 20; ++t) {
            const Vector s = prior.sample(rng);
            CHECK(prior.project(s).distance <= 1e-10 * std::max(1.0, s.norm()));
        }
    }
    SUBCASE("points already inside project to themselves") {
        const Vector s = prior.sample(rng);
        const auto p = prior.project(s);
        CHECK((p.point - s).norm() <= 1e-10);
    }
}

TEST_CASE("parabola prior") {
    const Parabola2DPrior prior;
    SUBCASE("samples satisfy y = x^2 exactly") {
        Rng rng(43);
        for (int t = 0; t < 20; ++t) {
            const Vector s = prior.sample(rng);
            CHECK(s(1) == s(0) * s(0));
        }
    }
    SUBCASE("projection of (0, 1)") {
        Vector v(2);
        v << 0.0, 1.0;
        const auto p = prior.project(v);
        CHECK(p.distance == doctest::Approx(std::sqrt(3.0) / 2.0));
        CHECK(std::abs(p.point(0)) == doctest::Approx(std::sqrt(0.5)));
        CHECK(p.point(1) == doctest::Approx(0.5));
    }
    SUBCASE("membership near and off the curve") {
        Vector on(2);
        on << 0.125, 0.125 * 0.125 + 1e-12;
        CHECK(membership(prior, on, 1e-9));
        Vector off(2);
        off << 0.125, 0.0625;  // on the translated curve of the worked example, not on y = x^2
        CHECK_FALSE(membership(prior, off, 1e-9));
    }
}

TEST_CASE("sparse union prior") {
    Rng rng(47);
    const SparseUnionPrior prior(random_subspace_basis(8, 8, rng), 2);
    CHECK(prior.exhaustive());
    SUBCASE("samples have at most M nonzero coefficients") {
        const Matrix basis = random_subspace_basis(8, 8, rng);
        const SparseUnionPrior sp(basis, 3);
        for (int t = 0; t < 10; ++t) {
            const Vector s = sp.sample(rng);
            const Vector c = basis.transpose() * s;
            int nz = 0;
            for (int i = 0; i < c.size(); ++i)
                if (std::abs(c(i)) > 1e-10) ++nz;
            CHECK(nz <= 3);
        }
    }
    SUBCASE("projection is locally optimal against random samples") {
        Rng r2(53);
        Vector v(8);
        for (int i = 0; i < 8; ++i) v(i) = r2.gaussian();
        const auto p = prior.project(v);
        for (int t = 0; t < 100; ++t)
            CHECK(p.distance <= (v - prior.sample(r2)).norm() + 1e-12);
    }
}

TEST_CASE("relu generator prior") {
    SUBCASE("identity network") {
        std::vector<AffineLayer> layers{{Matrix::Identity(3, 3), Vector::Zero(3)}};
        const ReluGeneratorPrior gen(layers);
        Vector z(3);
        z << 1.0, -2.0, 0.5;
        CHECK((relu_forward(gen, z) - z).norm() == 0.0);
    }
    SUBCASE("negation followed by relu kills nonnegative input") {
        std::vector<AffineLayer> layers{{-Matrix::Identity(2, 2), Vector::Zero(2)},
                                        {Matrix::Identity(2, 2), Vector::Zero(2)}};
        const ReluGeneratorPrior gen(layers);
        Vector z(2);
        z << 1.0, 2.0;
        CHECK(relu_forward(gen, z).norm() == 0.0);
    }
    SUBCASE("positive homogeneity with zero biases") {
        Rng rng(59);
        Matrix W1(4, 2), W2(3, 4);
        for (int i = 0; i < W1.size(); ++i) W1(i / 2, i % 2) = rng.gaussian();
        for (int i = 0; i < W2.size(); ++i) W2(i / 4, i % 4) = rng.gaussian();
        const ReluGeneratorPrior gen({{W1, Vector::Zero(4)}, {W2, Vector::Zero(3)}});
        Vector z(2);
        z << 0.3, -0.7;
        const double alpha = 2.5;
        CHECK((relu_forward(gen, alpha * z) - alpha * relu_forward(gen, z)).norm() <= 1e-12);
    }
    SUBCASE("projection finds points of the range") {
        Rng rng(61);
        Matrix W(4, 2);
        for (int i = 0; i < W.size(); ++i) W(i / 2, i % 2) = rng.gaussian();
        const ReluGeneratorPrior gen({{W, Vector::Zero(4)}});
        const Vector target = gen.sample(rng);
        const auto p = gen.project(target);
        CHECK(p.distance <= 1e-6 * std::max(1.0, target.norm()));
        CHECK_FALSE(p.exact);
    }
}

TEST_CASE("sample then membership round trip") {
    Rng rng(67);
    std::vector<std::shared_ptr<const Prior>> priors = {
        std::make_shared<GridPrior>(3, 4),
        std::make_shared<SubspacePrior>(random_subspace_basis(6, 2, rng)),
        std::make_shared<Parabola2DPrior>(),
        std::make_shared<TwoLines2DPrior>(0.3, 1.2),
        std::make_shared<SparseUnionPrior>(random_subspace_basis(6, 6, rng), 2),
    };
    Vector center(2), origin(2), dir(2);
    center << 0.2, 0.1;
    origin << 1.5, -0.5;
    dir << 0.8, 0.6;
    priors.push_back(std::make_shared<RayCircleUnion2DPrior>(center, 1.0, origin, dir));
    for (const auto& prior : priors) {
        for (int t = 0; t < 20; ++t) {
            const Vector s = prior->sample(rng);
            CHECK(membership(*prior, s, 1e-9));
        }
        CHECK(prior->declared_dim() <= prior->ambient_dim());
    }
}

TEST_CASE("generic transforms") {
    Rng rng(71);
    SUBCASE("orthogonal class") {
        const auto t = sample_transform(TransformClass::O, 5, rng);
        CHECK((t.linear.transpose() * t.linear - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() <=
              1e-12);
        CHECK(t.shift.norm() == 0.0);
    }
    SUBCASE("gl class is invertible with bounded condition") {
        for (int t = 0; t < 10; ++t) {
            const auto tr = sample_transform(TransformClass::GL, 4, rng);
            CHECK(std::abs(tr.linear.determinant()) > 0.0);
            CHECK(tr.condition <= 1e6);
            CHECK((tr.linear * tr.inverse - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-8);
        }
    }
    SUBCASE("independent affine samples differ") {
        const auto a = sample_transform(TransformClass::Aff, 3, rng);
        const auto b = sample_transform(TransformClass::Aff, 3, rng);
        CHECK((a.linear - b.linear).cwiseAbs().maxCoeff() > 0.0);
        CHECK((a.shift - b.shift).norm() > 0.0);
    }
}

TEST_CASE("translated priors") {
    Rng rng(73);
    SUBCASE("orthogonal translates preserve distances exactly") {
        const auto base = std::make_shared<Parabola2DPrior>();
        for (int t = 0; t < 25; ++t) {
            const TranslatedPrior prior(base, sample_transform(TransformClass::O, 2, rng));
            Vector v(2);
            v << rng.gaussian(), rng.gaussian();
            const double d_trans = prior.project(v).distance;
            const double d_base = base->project(prior.transform().apply_inverse(v)).distance;
            CHECK(d_trans == doctest::Approx(d_base).epsilon(1e-10));
        }
    }
    SUBCASE("affine translate of a subspace projects exactly") {
        const auto base = std::make_shared<SubspacePrior>(random_subspace_basis(8, 3, rng));
        const TranslatedPrior prior(base, sample_transform(TransformClass::Aff, 8, rng));
        for (int t = 0; t < 20; ++t) {
            const Vector s = prior.sample(rng);
            CHECK(prior.project(s).distance <= 1e-8 * std::max(1.0, s.norm()));
        }
        // projection residual is orthogonal to the translated span
        Vector v(8);
        for (int i = 0; i < 8; ++i) v(i) = rng.gaussian();
        const auto span = prior.affine_span();
        REQUIRE(span.has_value());
        const auto p = prior.project(v);
        CHECK((span->basis.transpose() * (v - p.point)).cwiseAbs().maxCoeff() <= 1e-9);
    }
    SUBCASE("gl translate of a curve uses the one-dimensional oracle") {
        const auto base = std::make_shared<Parabola2DPrior>();
        const TranslatedPrior prior(base, sample_transform(TransformClass::GL, 2, rng));
        for (int t = 0; t < 10; ++t) {
            const Vector s = prior.sample(rng);
            CHECK(prior.project(s).distance <= 1e-5 * std::max(1.0, s.norm()));
        }
    }
    SUBCASE("membership maps through the inverse transform") {
        const auto base = std::make_shared<GridPrior>(3, 3);
        const TranslatedPrior prior(base, sample_transform(TransformClass::GL, 3, rng));
        Rng r2(79);
        for (int t = 0; t < 20; ++t) {
            const Vector s = prior.sample(r2);
            CHECK(membership(prior, s, 1e-8));
            CHECK(base->member(prior.transform().apply_inverse(s), 1e-8));
        }
    }
    SUBCASE("relu generators absorb affine translates") {
        Matrix W(3, 2);
        W << 1, 0, 0, 1, 1, 1;
        const auto base = std::make_shared<ReluGeneratorPrior>(
            std::vector<AffineLayer>{{W, Vector::Zero(3)}});
        const TranslatedPrior prior(base, sample_transform(TransformClass::Aff, 3, rng));
        const Vector s = prior.sample(rng);
        CHECK(prior.project(s).distance <= 1e-6 * std::max(1.0, s.norm()));
    }
}
