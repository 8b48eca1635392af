#include <doctest.h>

#include <algorithm>

#include "orbitlab/invariants.hpp"

using namespace orbitlab;

TEST_CASE("gram_blocks basics") {
    SUBCASE("zero signal gives zero blocks") {
        const auto spec = RepresentationSpec{{{2, 2}, {3, 1}}};
        const auto g = gram_blocks(Signal::zero(spec));
        for (const auto& B : g.blocks) CHECK(B.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("squared norm of a column") {
        RepresentationSpec spec{{{2, 1}}};
        Signal x = Signal::zero(spec);
        x.blocks[0] << 3, 4;
        CHECK(gram_blocks(x).blocks[0](0, 0) == doctest::Approx(25.0));
    }
    SUBCASE("invariance under the ambiguity action") {
        Rng rng(31);
        const auto spec = RepresentationSpec{{{1, 2}, {2, 3}, {3, 1}}};
        for (int t = 0; t < 100; ++t) {
            const Signal x = gaussian_signal(spec, rng);
            const auto h = haar_ambiguity(spec, rng);
            CHECK(gram_distance(gram_blocks(act(h, x)), gram_blocks(x)) <= 1e-10);
        }
    }
}

TEST_CASE("empirical second moment") {
    SUBCASE("zero signal, zero noise") {
        Rng rng(1);
        const auto est = empirical_second_moment(DataGroupSpec(CyclicGroup{5}),
                                                 Vector::Zero(5), 100, 0.0, rng);
        CHECK(est.matrix.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("finite-group Monte Carlo matches the brute-force average within 5%") {
        Rng rng(2);
        for (const DataGroupSpec G :
             {DataGroupSpec(CyclicGroup{8}), DataGroupSpec(DihedralGroup{8})}) {
            Vector x(8);
            for (int i = 0; i < 8; ++i) x(i) = rng.gaussian();
            const Matrix exact = exact_second_moment(G, x);
            const auto est = empirical_second_moment(G, x, 10000, 0.0, rng);
            const double rel = (est.matrix - exact).norm() / exact.norm();
            CHECK(rel <= 0.05);
        }
    }
    SUBCASE("debias on pure noise") {
        Rng rng(3);
        const int N = 8;
        const double sigma = 1.0;
        const auto est = empirical_second_moment(DataGroupSpec(CyclicGroup{N}), Vector::Zero(N),
                                                 10000, sigma, rng);
        CHECK(est.matrix.norm() <= 5.0 * sigma * sigma * N / 100.0);
    }
    SUBCASE("symmetry") {
        Rng rng(4);
        Vector x(6);
        for (int i = 0; i < 6; ++i) x(i) = rng.gaussian();
        const auto est =
            empirical_second_moment(DataGroupSpec(DihedralGroup{6}), x, 500, 0.5, rng);
        CHECK((est.matrix - est.matrix.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("exact second moment for the rotation-blocks group matches Monte Carlo") {
    Rng rng(5);
    const DataGroupSpec G = RotationBlocksGroup{1, 2};
    const int n = ambient_dim(G);
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = rng.gaussian();
    const Matrix exact = exact_second_moment(G, x);
    const auto est = empirical_second_moment(G, x, 20000, 0.0, rng);
    CHECK((est.matrix - exact).norm() / exact.norm() <= 0.06);
}

TEST_CASE("second_moment_to_gram") {
    SUBCASE("dihedral(4) impulse: projection norms squared per frequency") {
        const DataGroupSpec G = DihedralGroup{4};
        Vector e1 = Vector::Zero(4);
        e1(0) = 1.0;
        const auto gram =
            second_moment_to_gram(G, SecondMomentEstimate{exact_second_moment(G, e1), 0, 0.0});
        REQUIRE(gram.blocks.size() == 3);
        CHECK(gram.blocks[0](0, 0) == doctest::Approx(0.25).epsilon(1e-10));
        CHECK(gram.blocks[1](0, 0) == doctest::Approx(0.5).epsilon(1e-10));
        CHECK(gram.blocks[2](0, 0) == doctest::Approx(0.25).epsilon(1e-10));
    }
    SUBCASE("zero matrix maps to zero blocks") {
        const DataGroupSpec G = CyclicGroup{6};
        const auto gram =
            second_moment_to_gram(G, SecondMomentEstimate{Matrix::Zero(6, 6), 0, 0.0});
        for (const auto& B : gram.blocks) CHECK(B.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("round trip against gram_blocks in isotypic coordinates") {
        Rng rng(6);
        for (int N : {5, 8, 12}) {
            for (const DataGroupSpec G :
                 {DataGroupSpec(CyclicGroup{N}), DataGroupSpec(DihedralGroup{N})}) {
                Vector x(N);
                for (int i = 0; i < N; ++i) x(i) = rng.gaussian();
                const auto gram = second_moment_to_gram(
                    G, SecondMomentEstimate{exact_second_moment(G, x), 0, 0.0});
                const Matrix P = isotypic_basis(G);
                const Signal coeff = Signal::unflatten(isotypic_spec(G), P.transpose() * x);
                CHECK(gram_distance(gram, gram_blocks(coeff)) <= 1e-8);
            }
        }
    }
    SUBCASE("rotation blocks keep multiplicities") {
        Rng rng(7);
        const DataGroupSpec G = RotationBlocksGroup{1, 3};
        const auto spec = isotypic_spec(G);
        const Signal x = gaussian_signal(spec, rng);
        const auto gram = second_moment_to_gram(
            G, SecondMomentEstimate{exact_second_moment(G, x.flatten()), 0, 0.0});
        CHECK(gram_distance(gram, gram_blocks(x)) <= 1e-8);
    }
    SUBCASE("groups without an isotypic basis are rejected") {
        CHECK_THROWS_AS(second_moment_to_gram(DataGroupSpec(SignChangeGroup{4}),
                                              SecondMomentEstimate{Matrix::Zero(4, 4), 0, 0.0}),
                        std::invalid_argument);
    }
}

TEST_CASE("power spectrum") {
    SUBCASE("impulse is flat") {
        Vector x = Vector::Zero(6);
        x(0) = 1.0;
        const Vector p = power_spectrum(x);
        for (int i = 0; i < 6; ++i) CHECK(p(i) == doctest::Approx(1.0));
    }
    SUBCASE("constant concentrates at frequency zero") {
        const int N = 5;
        const Vector p = power_spectrum(Vector::Ones(N));
        CHECK(p(0) == doctest::Approx(static_cast<double>(N) * N));
        for (int i = 1; i < N; ++i) CHECK(p(i) == doctest::Approx(0.0).epsilon(1e-10));
    }
    SUBCASE("invariant under the dihedral action, nonnegative, Parseval") {
        Rng rng(8);
        const int N = 9;
        const DataGroupSpec G = DihedralGroup{N};
        for (int t = 0; t < 50; ++t) {
            Vector x(N);
            for (int i = 0; i < N; ++i) x(i) = rng.gaussian();
            const Vector p = power_spectrum(x);
            CHECK(p.minCoeff() >= -1e-12);
            CHECK(p.sum() == doctest::Approx(N * x.squaredNorm()).epsilon(1e-10));
            const Vector q = power_spectrum(data_action(G, sample_uniform(G, rng), x));
            CHECK((p - q).norm() <= 1e-10 * std::max(1.0, p.norm()));
        }
    }
}

TEST_CASE("rowsort") {
    SUBCASE("sorts each row ascending") {
        Matrix X(2, 3);
        X << 3, 1, 2, 6, 5, 4;
        const Matrix Y = rowsort(X);
        CHECK(Y(0, 0) == 1);
        CHECK(Y(0, 1) == 2);
        CHECK(Y(0, 2) == 3);
        CHECK(Y(1, 0) == 4);
        CHECK(Y(1, 1) == 5);
        CHECK(Y(1, 2) == 6);
    }
    SUBCASE("idempotent and row-multiset preserving") {
        Rng rng(9);
        Matrix X(3, 5);
        for (int i = 0; i < X.size(); ++i) X(i / 5, i % 5) = rng.gaussian();
        const Matrix Y = rowsort(X);
        CHECK((rowsort(Y) - Y).cwiseAbs().maxCoeff() == 0.0);
        for (int r = 0; r < 3; ++r) {
            std::vector<double> a(5), b(5);
            for (int j = 0; j < 5; ++j) {
                a[j] = X(r, j);
                b[j] = Y(r, j);
            }
            std::sort(a.begin(), a.end());
            CHECK(std::equal(a.begin(), a.end(), b.begin()));
            CHECK(std::is_sorted(b.begin(), b.end()));
        }
    }
    SUBCASE("collision iff rows related by independent permutations (brute force over S3 x S3)") {
        Rng rng(10);
        std::vector<std::vector<int>> perms;
        std::vector<int> p = {0, 1, 2};
        do {
            perms.push_back(p);
        } while (std::next_permutation(p.begin(), p.end()));

        Matrix X(2, 3);
        for (int i = 0; i < 6; ++i) X(i / 3, i % 3) = std::floor(rng.uniform(-10, 10));
        for (const auto& s1 : perms)
            for (const auto& s2 : perms) {
                Matrix Y(2, 3);
                for (int j = 0; j < 3; ++j) {
                    Y(0, j) = X(0, s1[j]);
                    Y(1, j) = X(1, s2[j]);
                }
                CHECK((rowsort(Y) - rowsort(X)).cwiseAbs().maxCoeff() == 0.0);
            }
        // a matrix that is not a row-wise permutation collides with nothing
        Matrix Z = X;
        Z(0, 0) += 1.0;
        CHECK((rowsort(Z) - rowsort(X)).cwiseAbs().maxCoeff() > 0.0);
    }
}

TEST_CASE("clip_psd removes small negative eigenvalues") {
    Matrix B(2, 2);
    B << 1.0, 0.0, 0.0, -1e-14;
    const Matrix C = clip_psd(B);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(C);
    CHECK(eig.eigenvalues().minCoeff() >= 0.0);
    CHECK(C(0, 0) == doctest::Approx(1.0));
}
