#include "orbitlab/groups.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace orbitlab {

namespace {

int mod(int a, int n) { return ((a % n) + n) % n; }

std::uint64_t factorial(int n) {
    std::uint64_t f = 1;
    for (int i = 2; i <= n; ++i) f *= static_cast<std::uint64_t>(i);
    return f;
}

Vector cyclic_shift(const Vector& x, int s) {
    const int N = static_cast<int>(x.size());
    Vector y(N);
    for (int i = 0; i < N; ++i) y(i) = x(mod(i - s, N));
    return y;
}

Vector reverse_circular(const Vector& x) {
    const int N = static_cast<int>(x.size());
    Vector y(N);
    for (int i = 0; i < N; ++i) y(i) = x(mod(-i, N));
    return y;
}

} // namespace

int ambient_dim(const DataGroupSpec& G) {
    return std::visit(
        [](const auto& g) -> int {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, CyclicGroup> || std::is_same_v<T, DihedralGroup> ||
                          std::is_same_v<T, SignChangeGroup>)
                return g.N;
            else if constexpr (std::is_same_v<T, RowPermutationGroup>)
                return g.d * g.n;
            else
                return cryoem_spec(g.bandlimit, g.radial_samples).dim();
        },
        G);
}

bool is_finite(const DataGroupSpec& G) {
    return !std::holds_alternative<RotationBlocksGroup>(G);
}

std::uint64_t group_order(const DataGroupSpec& G) {
    return std::visit(
        [](const auto& g) -> std::uint64_t {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, CyclicGroup>)
                return static_cast<std::uint64_t>(g.N);
            else if constexpr (std::is_same_v<T, DihedralGroup>)
                return 2ull * g.N;
            else if constexpr (std::is_same_v<T, SignChangeGroup>) {
                if (g.N >= 63) throw std::invalid_argument("group_order: sign-change group too large");
                return 1ull << g.N;
            } else if constexpr (std::is_same_v<T, RowPermutationGroup>)
                return factorial(g.n);
            else
                throw std::invalid_argument("group_order: group is not finite");
        },
        G);
}

Vector data_action(const DataGroupSpec& G, const GroupElement& g, const Vector& x) {
    if (x.size() != ambient_dim(G))
        throw std::invalid_argument("data_action: ambient dimension mismatch");
    if (const auto* c = std::get_if<CyclicGroup>(&G)) {
        const auto* e = std::get_if<CyclicElement>(&g);
        if (!e) throw std::invalid_argument("data_action: element type mismatch");
        (void)c;
        return cyclic_shift(x, e->shift);
    }
    if (std::holds_alternative<DihedralGroup>(G)) {
        const auto* e = std::get_if<DihedralElement>(&g);
        if (!e) throw std::invalid_argument("data_action: element type mismatch");
        Vector y = cyclic_shift(x, e->shift);
        if (e->reflect) y = reverse_circular(y);
        return y;
    }
    if (std::holds_alternative<SignChangeGroup>(G)) {
        const auto* e = std::get_if<SignElement>(&g);
        if (!e || static_cast<int>(e->signs.size()) != x.size())
            throw std::invalid_argument("data_action: invalid sign element");
        Vector y(x.size());
        for (int i = 0; i < x.size(); ++i) {
            if (e->signs[i] != 1 && e->signs[i] != -1)
                throw std::invalid_argument("data_action: signs must be +-1");
            y(i) = e->signs[i] * x(i);
        }
        return y;
    }
    if (const auto* rp = std::get_if<RowPermutationGroup>(&G)) {
        const auto* e = std::get_if<PermElement>(&g);
        if (!e || static_cast<int>(e->perm.size()) != rp->n)
            throw std::invalid_argument("data_action: invalid permutation element");
        std::vector<bool> seen(rp->n, false);
        for (int p : e->perm) {
            if (p < 0 || p >= rp->n || seen[p])
                throw std::invalid_argument("data_action: not a permutation");
            seen[p] = true;
        }
        Vector y(x.size());
        for (int r = 0; r < rp->d; ++r)
            for (int j = 0; j < rp->n; ++j)
                y(r * rp->n + j) = x(r * rp->n + e->perm[j]);
        return y;
    }
    const auto& rb = std::get<RotationBlocksGroup>(G);
    const auto* e = std::get_if<RotationBlocksElement>(&g);
    if (!e) throw std::invalid_argument("data_action: element type mismatch");
    const RepresentationSpec spec = cryoem_spec(rb.bandlimit, rb.radial_samples);
    if (e->rotations.size() != spec.blocks.size())
        throw std::invalid_argument("data_action: rotation factor count mismatch");
    Signal sx = Signal::unflatten(spec, x);
    AmbiguityElement h{e->rotations};
    return act(h, sx).flatten();
}

GroupElement sample_uniform(const DataGroupSpec& G, Rng& rng) {
    return std::visit(
        [&rng](const auto& g) -> GroupElement {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, CyclicGroup>) {
                return CyclicElement{static_cast<int>(rng.uniform_index(g.N))};
            } else if constexpr (std::is_same_v<T, DihedralGroup>) {
                return DihedralElement{static_cast<int>(rng.uniform_index(g.N)), rng.coin()};
            } else if constexpr (std::is_same_v<T, SignChangeGroup>) {
                SignElement e;
                e.signs.resize(g.N);
                for (int i = 0; i < g.N; ++i) e.signs[i] = rng.coin() ? 1 : -1;
                return e;
            } else if constexpr (std::is_same_v<T, RowPermutationGroup>) {
                PermElement e;
                e.perm.resize(g.n);
                std::iota(e.perm.begin(), e.perm.end(), 0);
                // Fisher-Yates
                for (int i = g.n - 1; i > 0; --i) {
                    const int j = static_cast<int>(rng.uniform_index(i + 1));
                    std::swap(e.perm[i], e.perm[j]);
                }
                return e;
            } else {
                RotationBlocksElement e;
                for (int l = 0; l <= g.bandlimit; ++l)
                    e.rotations.push_back(haar_special_orthogonal(2 * l + 1, rng));
                return e;
            }
        },
        G);
}

std::vector<GroupElement> enumerate_elements(const DataGroupSpec& G, std::uint64_t cap) {
    if (!is_finite(G)) throw std::invalid_argument("enumerate_elements: group is not finite");
    const std::uint64_t n = group_order(G);
    if (n > cap) throw std::invalid_argument("enumerate_elements: order exceeds cap");
    std::vector<GroupElement> out;
    out.reserve(n);
    if (const auto* c = std::get_if<CyclicGroup>(&G)) {
        for (int s = 0; s < c->N; ++s) out.push_back(CyclicElement{s});
    } else if (const auto* d = std::get_if<DihedralGroup>(&G)) {
        for (int refl = 0; refl < 2; ++refl)
            for (int s = 0; s < d->N; ++s) out.push_back(DihedralElement{s, refl != 0});
    } else if (const auto* sc = std::get_if<SignChangeGroup>(&G)) {
        for (std::uint64_t mask = 0; mask < n; ++mask) {
            SignElement e;
            e.signs.resize(sc->N);
            for (int i = 0; i < sc->N; ++i)
                e.signs[i] = (mask >> i) & 1 ? -1 : 1;
            out.push_back(std::move(e));
        }
    } else if (const auto* rp = std::get_if<RowPermutationGroup>(&G)) {
        std::vector<int> p(rp->n);
        std::iota(p.begin(), p.end(), 0);
        do {
            out.push_back(PermElement{p});
        } while (std::next_permutation(p.begin(), p.end()));
    }
    return out;
}

RepresentationSpec isotypic_spec(const DataGroupSpec& G) {
    if (const auto* c = std::get_if<CyclicGroup>(&G)) return dihedral_decomposition(c->N);
    if (const auto* d = std::get_if<DihedralGroup>(&G)) return dihedral_decomposition(d->N);
    if (const auto* rb = std::get_if<RotationBlocksGroup>(&G))
        return cryoem_spec(rb->bandlimit, rb->radial_samples);
    throw std::invalid_argument("isotypic_spec: no registered isotypic decomposition for this group");
}

Matrix isotypic_basis(const DataGroupSpec& G) {
    if (const auto* c = std::get_if<CyclicGroup>(&G)) return fourier_isotypic_basis(c->N);
    if (const auto* d = std::get_if<DihedralGroup>(&G)) return fourier_isotypic_basis(d->N);
    if (std::holds_alternative<RotationBlocksGroup>(G)) {
        const int n = ambient_dim(G);
        return Matrix::Identity(n, n);
    }
    throw std::invalid_argument("isotypic_basis: no registered isotypic basis for this group");
}

bool has_isotypic_basis(const DataGroupSpec& G) {
    return std::holds_alternative<CyclicGroup>(G) || std::holds_alternative<DihedralGroup>(G) ||
           std::holds_alternative<RotationBlocksGroup>(G);
}

} // namespace orbitlab
