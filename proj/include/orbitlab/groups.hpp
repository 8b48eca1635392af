#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "orbitlab/repr.hpp"

namespace orbitlab {

// Data groups G whose translated signals feed the second moment.

struct CyclicGroup { int N; };          // circular shift on R^N
struct DihedralGroup { int N; };        // shift + reversal on R^N
struct SignChangeGroup { int N; };      // coordinate sign flips on R^N
struct RowPermutationGroup { int d; int n; };  // same permutation on every row of d x n
/// Stand-in for the rotation action on bandlimited coefficients: independent
/// Haar factors on prod SO(2l+1), acting diagonally on all radial copies.
struct RotationBlocksGroup { int bandlimit; int radial_samples; };

using DataGroupSpec = std::variant<CyclicGroup, DihedralGroup, SignChangeGroup,
                                   RowPermutationGroup, RotationBlocksGroup>;

struct CyclicElement { int shift; };
struct DihedralElement { int shift; bool reflect; };
struct SignElement { std::vector<std::int8_t> signs; };
struct PermElement { std::vector<int> perm; };  // y[j] = x[perm[j]]
struct RotationBlocksElement { std::vector<Matrix> rotations; };

using GroupElement = std::variant<CyclicElement, DihedralElement, SignElement,
                                  PermElement, RotationBlocksElement>;

int ambient_dim(const DataGroupSpec& G);

bool is_finite(const DataGroupSpec& G);

/// Number of elements; throws for infinite groups.
std::uint64_t group_order(const DataGroupSpec& G);

Vector data_action(const DataGroupSpec& G, const GroupElement& g, const Vector& x);

GroupElement sample_uniform(const DataGroupSpec& G, Rng& rng);

/// All elements of a finite group; throws if infinite or order exceeds cap.
std::vector<GroupElement> enumerate_elements(const DataGroupSpec& G,
                                             std::uint64_t cap = 1u << 20);

/// Isotypic block structure of the ambient representation, where known
/// (cyclic, dihedral, rotation blocks). Throws otherwise.
RepresentationSpec isotypic_spec(const DataGroupSpec& G);

/// Orthonormal change of basis from ambient to isotypic coordinates
/// (columns ordered like isotypic_spec). Identity for rotation blocks.
Matrix isotypic_basis(const DataGroupSpec& G);

bool has_isotypic_basis(const DataGroupSpec& G);

} // namespace orbitlab
