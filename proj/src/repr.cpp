#include "orbitlab/repr.hpp"

#include <Eigen/QR>
#include <cmath>
#include <numbers>

namespace orbitlab {

EffectiveDim effective_dim(const RepresentationSpec& spec) {
    spec.validate();
    EffectiveDim out;
    long long k = 0;
    for (const auto& b : spec.blocks) {
        out.dim_v += b.irrep_dim * b.multiplicity;
        k += orthogonal_group_dim(b.irrep_dim) -
             orthogonal_group_dim(b.irrep_dim - b.multiplicity);
    }
    out.orbit_dim = static_cast<int>(k);
    out.effective = out.dim_v - out.orbit_dim;
    return out;
}

RepresentationSpec cryoem_spec(int bandlimit, int radial_samples) {
    if (bandlimit < 0) throw std::invalid_argument("cryoem_spec: bandlimit must be >= 0");
    if (radial_samples < 1) throw std::invalid_argument("cryoem_spec: radial_samples must be >= 1");
    RepresentationSpec spec;
    for (int l = 0; l <= bandlimit; ++l)
        spec.blocks.push_back({2 * l + 1, radial_samples});
    return spec;
}

RepresentationSpec dihedral_decomposition(int N) {
    if (N < 2) throw std::invalid_argument("dihedral_decomposition: N must be >= 2");
    RepresentationSpec spec;
    spec.blocks.push_back({1, 1});
    const int pairs = (N % 2 == 0) ? N / 2 - 1 : (N - 1) / 2;
    for (int m = 0; m < pairs; ++m) spec.blocks.push_back({2, 1});
    if (N % 2 == 0) spec.blocks.push_back({1, 1});
    return spec;
}

bool orbits_connected(const RepresentationSpec& spec) {
    for (const auto& b : spec.blocks)
        if (b.irrep_dim == 1) return false;
    return true;
}

Signal Signal::zero(const RepresentationSpec& spec) {
    Signal x{spec, {}};
    for (const auto& b : spec.blocks)
        x.blocks.push_back(Matrix::Zero(b.irrep_dim, b.multiplicity));
    return x;
}

void Signal::validate() const {
    spec.validate();
    if (blocks.size() != spec.blocks.size())
        throw std::invalid_argument("Signal: block count mismatch");
    for (size_t l = 0; l < blocks.size(); ++l) {
        if (blocks[l].rows() != spec.blocks[l].irrep_dim ||
            blocks[l].cols() != spec.blocks[l].multiplicity)
            throw std::invalid_argument("Signal: block shape mismatch at index " + std::to_string(l));
    }
}

double Signal::norm() const {
    double s = 0.0;
    for (const auto& X : blocks) s += X.squaredNorm();
    return std::sqrt(s);
}

Vector Signal::flatten() const {
    Vector v(spec.dim());
    int off = 0;
    for (size_t l = 0; l < blocks.size(); ++l) {
        const auto& X = blocks[l];
        for (int r = 0; r < X.cols(); ++r) {
            v.segment(off, X.rows()) = X.col(r);
            off += static_cast<int>(X.rows());
        }
    }
    return v;
}

Signal Signal::unflatten(const RepresentationSpec& spec, const Vector& v) {
    if (v.size() != spec.dim())
        throw std::invalid_argument("Signal::unflatten: length mismatch");
    Signal x{spec, {}};
    int off = 0;
    for (const auto& b : spec.blocks) {
        Matrix X(b.irrep_dim, b.multiplicity);
        for (int r = 0; r < b.multiplicity; ++r) {
            X.col(r) = v.segment(off, b.irrep_dim);
            off += b.irrep_dim;
        }
        x.blocks.push_back(std::move(X));
    }
    return x;
}

AmbiguityElement AmbiguityElement::identity(const RepresentationSpec& spec) {
    AmbiguityElement h;
    for (const auto& b : spec.blocks)
        h.factors.push_back(Matrix::Identity(b.irrep_dim, b.irrep_dim));
    return h;
}

void AmbiguityElement::validate(const RepresentationSpec& spec, double tol) const {
    if (factors.size() != spec.blocks.size())
        throw std::invalid_argument("AmbiguityElement: factor count mismatch");
    for (size_t l = 0; l < factors.size(); ++l) {
        const auto& Q = factors[l];
        const int n = spec.blocks[l].irrep_dim;
        if (Q.rows() != n || Q.cols() != n)
            throw std::invalid_argument("AmbiguityElement: factor shape mismatch");
        const double dev = (Q.transpose() * Q - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
        if (dev > tol)
            throw std::invalid_argument("AmbiguityElement: factor not orthogonal (deviation " +
                                        std::to_string(dev) + ")");
    }
}

Signal act(const AmbiguityElement& h, const Signal& x) {
    if (h.factors.size() != x.blocks.size())
        throw std::invalid_argument("act: factor count mismatch");
    Signal y{x.spec, {}};
    y.blocks.reserve(x.blocks.size());
    for (size_t l = 0; l < x.blocks.size(); ++l) {
        if (h.factors[l].cols() != x.blocks[l].rows())
            throw std::invalid_argument("act: shape mismatch at block " + std::to_string(l));
        y.blocks.push_back(h.factors[l] * x.blocks[l]);
    }
    return y;
}

AmbiguityElement compose(const AmbiguityElement& h2, const AmbiguityElement& h1) {
    if (h2.factors.size() != h1.factors.size())
        throw std::invalid_argument("compose: factor count mismatch");
    AmbiguityElement h;
    h.factors.reserve(h1.factors.size());
    for (size_t l = 0; l < h1.factors.size(); ++l)
        h.factors.push_back(h2.factors[l] * h1.factors[l]);
    return h;
}

Matrix haar_orthogonal(int m, Rng& rng) {
    if (m < 1) throw std::invalid_argument("haar_orthogonal: m must be >= 1");
    if (m == 1) return Matrix::Constant(1, 1, rng.coin() ? 1.0 : -1.0);
    Matrix A(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) A(i, j) = rng.gaussian();
    Eigen::HouseholderQR<Matrix> qr(A);
    Matrix Q = qr.householderQ();
    const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
    // absorbing the R-diagonal signs makes the law exactly Haar
    for (int j = 0; j < m; ++j)
        if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
    return Q;
}

Matrix haar_special_orthogonal(int m, Rng& rng) {
    Matrix Q = haar_orthogonal(m, rng);
    if (Q.determinant() < 0.0) Q.col(m - 1) = -Q.col(m - 1);
    return Q;
}

AmbiguityElement haar_ambiguity(const RepresentationSpec& spec, Rng& rng) {
    AmbiguityElement h;
    for (const auto& b : spec.blocks)
        h.factors.push_back(haar_orthogonal(b.irrep_dim, rng));
    return h;
}

Signal gaussian_signal(const RepresentationSpec& spec, Rng& rng) {
    Signal x = Signal::zero(spec);
    for (auto& X : x.blocks)
        for (int j = 0; j < X.cols(); ++j)
            for (int i = 0; i < X.rows(); ++i) X(i, j) = rng.gaussian();
    return x;
}

Matrix fourier_isotypic_basis(int N) {
    if (N < 2) throw std::invalid_argument("fourier_isotypic_basis: N must be >= 2");
    Matrix P(N, N);
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(N));
    const double amp = std::sqrt(2.0 / N);
    int col = 0;
    for (int k = 0; k < N; ++k) P(k, col) = inv_sqrt_n;
    ++col;
    const int pairs = (N % 2 == 0) ? N / 2 - 1 : (N - 1) / 2;
    for (int m = 1; m <= pairs; ++m) {
        for (int k = 0; k < N; ++k) {
            const double t = 2.0 * std::numbers::pi * m * k / N;
            P(k, col) = amp * std::cos(t);
            P(k, col + 1) = amp * std::sin(t);
        }
        col += 2;
    }
    if (N % 2 == 0) {
        for (int k = 0; k < N; ++k)
            P(k, col) = (k % 2 == 0 ? inv_sqrt_n : -inv_sqrt_n);
        ++col;
    }
    return P;
}

} // namespace orbitlab
