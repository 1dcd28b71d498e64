#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "nsbox/boxes.hpp"
#include "nsbox/ensembles.hpp"

namespace nsbox {

inline constexpr std::size_t kNumCatalogVertices = 24;
inline constexpr std::size_t kNumProductVertices = 16;

/// Vertices of the 2x2x2x2 no-signalling polytope in catalog order: product
/// S_ij x S_kl at 4 * (2i + j) + (2k + l), then PR_{abd} at 16 + 4a + 2b + d.
const std::array<BipartiteBox, kNumCatalogVertices>& vertex_catalog();

std::string catalog_label(std::size_t index);

/// FNV-1a 64 over the serialized catalog (labels and tables in order).
std::uint64_t catalog_fingerprint();
std::string catalog_fingerprint_hex();

/// Exact vertex decomposition. Among all decompositions returns the
/// lexicographically smallest weight vector in catalog order. Throws
/// ValidationError for boxes that are not 2x2x2x2 no-signalling, and
/// InfeasibleError if no decomposition exists.
NonlocalEnsemble decompose(const BipartiteBox& box);

/// Decomposition over product vertices only, if one exists.
std::optional<NonlocalEnsemble> local_decomposition(const BipartiteBox& box);

/// Feasibility over the 16 product vertices. Throws ValidationError for
/// boxes that are not 2x2x2x2 no-signalling.
bool is_local(const BipartiteBox& box);

/// CHSH expressions Σ_xy (-1)^{(x^a)(y^b)^g} E_xy, indexed 4a + 2b + g,
/// with correlators E_xy = Σ_ab (-1)^{a^b} p(ab|xy). A no-signalling box is
/// local iff all eight are <= 2.
std::array<Rational, 8> chsh_values(const BipartiteBox& box);

bool satisfies_chsh_facets(const BipartiteBox& box);

}  // namespace nsbox
