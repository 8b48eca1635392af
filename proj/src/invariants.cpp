#include "orbitlab/invariants.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace orbitlab {

double GramBlocks::frobenius_norm() const {
    double s = 0.0;
    for (const auto& B : blocks) s += B.squaredNorm();
    return std::sqrt(s);
}

GramBlocks gram_blocks(const Signal& x) {
    x.validate();
    GramBlocks g{x.spec, {}};
    g.blocks.reserve(x.blocks.size());
    for (const auto& X : x.blocks) {
        Matrix B = X.transpose() * X;
        g.blocks.push_back(0.5 * (B + B.transpose()));
    }
    return g;
}

double gram_distance(const GramBlocks& a, const GramBlocks& b) {
    if (!(a.spec == b.spec))
        throw std::invalid_argument("gram_distance: spec mismatch");
    double s = 0.0;
    for (size_t l = 0; l < a.blocks.size(); ++l)
        s += (a.blocks[l] - b.blocks[l]).squaredNorm();
    return std::sqrt(s);
}

SecondMomentEstimate empirical_second_moment(const DataGroupSpec& G, const Vector& x,
                                             long long n, double sigma, Rng& rng) {
    if (n < 1) throw std::invalid_argument("empirical_second_moment: n must be >= 1");
    if (sigma < 0) throw std::invalid_argument("empirical_second_moment: sigma must be >= 0");
    const int N = ambient_dim(G);
    if (x.size() != N) throw std::invalid_argument("empirical_second_moment: dimension mismatch");
    Matrix acc = Matrix::Zero(N, N);
    Vector y(N);
    for (long long i = 0; i < n; ++i) {
        y = data_action(G, sample_uniform(G, rng), x);
        if (sigma > 0.0)
            for (int j = 0; j < N; ++j) y(j) += sigma * rng.gaussian();
        acc.selfadjointView<Eigen::Lower>().rankUpdate(y);
    }
    Matrix m = Matrix(acc.selfadjointView<Eigen::Lower>()) / static_cast<double>(n);
    m.diagonal().array() -= sigma * sigma;
    return SecondMomentEstimate{0.5 * (m + m.transpose()), n, sigma};
}

Matrix exact_second_moment(const DataGroupSpec& G, const Vector& x) {
    const int N = ambient_dim(G);
    if (x.size() != N) throw std::invalid_argument("exact_second_moment: dimension mismatch");
    if (is_finite(G)) {
        const auto elements = enumerate_elements(G);
        Matrix acc = Matrix::Zero(N, N);
        for (const auto& g : elements) {
            const Vector y = data_action(G, g, x);
            acc.selfadjointView<Eigen::Lower>().rankUpdate(y);
        }
        Matrix m = Matrix(acc.selfadjointView<Eigen::Lower>()) / static_cast<double>(elements.size());
        return 0.5 * (m + m.transpose());
    }
    // rotation blocks: cross-block terms vanish and each within-block copy
    // pair averages to (X_l^T X_l)[r,r'] / N_l times the identity
    const auto& rb = std::get<RotationBlocksGroup>(G);
    const RepresentationSpec spec = cryoem_spec(rb.bandlimit, rb.radial_samples);
    const Signal sx = Signal::unflatten(spec, x);
    const GramBlocks B = gram_blocks(sx);
    Matrix m = Matrix::Zero(N, N);
    int off = 0;
    for (size_t l = 0; l < spec.blocks.size(); ++l) {
        const int nl = spec.blocks[l].irrep_dim;
        const int rl = spec.blocks[l].multiplicity;
        for (int r = 0; r < rl; ++r)
            for (int rp = 0; rp < rl; ++rp) {
                const double v = B.blocks[l](r, rp) / nl;
                for (int i = 0; i < nl; ++i)
                    m(off + r * nl + i, off + rp * nl + i) = v;
            }
        off += nl * rl;
    }
    return m;
}

GramBlocks second_moment_to_gram(const DataGroupSpec& G, const SecondMomentEstimate& est) {
    if (!has_isotypic_basis(G))
        throw std::invalid_argument("second_moment_to_gram: group has no registered isotypic basis");
    const RepresentationSpec spec = isotypic_spec(G);
    const int N = spec.dim();
    if (est.matrix.rows() != N || est.matrix.cols() != N)
        throw std::invalid_argument("second_moment_to_gram: matrix dimension mismatch");
    const Matrix P = isotypic_basis(G);
    const Matrix S = P.transpose() * est.matrix * P;
    GramBlocks out{spec, {}};
    int off = 0;
    for (const auto& blk : spec.blocks) {
        const int nl = blk.irrep_dim;
        const int rl = blk.multiplicity;
        Matrix B(rl, rl);
        for (int r = 0; r < rl; ++r)
            for (int rp = 0; rp < rl; ++rp)
                B(r, rp) = S.block(off + r * nl, off + rp * nl, nl, nl).trace();
        B = 0.5 * (B + B.transpose());
        out.blocks.push_back(clip_psd(B));
        off += nl * rl;
    }
    return out;
}

Vector power_spectrum(const Vector& x) {
    const int N = static_cast<int>(x.size());
    if (N < 1) throw std::invalid_argument("power_spectrum: empty input");
    Vector p(N);
    for (int k = 0; k < N; ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (int j = 0; j < N; ++j) {
            const double t = -2.0 * std::numbers::pi * k * j / N;
            acc += x(j) * std::complex<double>(std::cos(t), std::sin(t));
        }
        p(k) = std::norm(acc);
    }
    return p;
}

Matrix rowsort(const Matrix& X) {
    Matrix Y = X;
    std::vector<double> row(Y.cols());
    for (int r = 0; r < Y.rows(); ++r) {
        for (int j = 0; j < Y.cols(); ++j) row[j] = Y(r, j);
        std::sort(row.begin(), row.end());
        for (int j = 0; j < Y.cols(); ++j) Y(r, j) = row[j];
    }
    return Y;
}

Matrix clip_psd(const Matrix& B, double rel_tol) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (B + B.transpose()));
    const Vector vals = eig.eigenvalues();
    const double scale = vals.size() ? vals.cwiseAbs().maxCoeff() : 0.0;
    const double cut = rel_tol * scale;
    Vector clipped = vals;
    for (int i = 0; i < clipped.size(); ++i)
        if (clipped(i) <= cut) clipped(i) = 0.0;
    return eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
}

GramBlocks clip_psd(const GramBlocks& B, double rel_tol) {
    GramBlocks out{B.spec, {}};
    for (const auto& blk : B.blocks) out.blocks.push_back(clip_psd(blk, rel_tol));
    return out;
}

} // namespace orbitlab
