#include "nsbox/decomposition.hpp"

#include <cstdio>

#include "nsbox/errors.hpp"
#include "nsbox/exact_simplex.hpp"

namespace nsbox {
namespace {

void require_2x2_no_signalling(const BipartiteBox& box) {
  if (!box.is_2x2()) {
    throw ValidationError("vertex decomposition needs a 2x2x2x2 box");
  }
  if (auto witness = find_signalling(box)) {
    throw ValidationError("box is signalling: " + witness->describe());
  }
}

// Columns are vertex tables; one row per table entry plus normalization.
lp::EqualityProblem vertex_problem(const BipartiteBox& box, std::size_t num_vertices) {
  const auto& catalog = vertex_catalog();
  lp::EqualityProblem problem;
  problem.matrix.assign(17, std::vector<Rational>(num_vertices));
  problem.rhs.assign(17, Rational(0));
  for (std::size_t e = 0; e < 16; ++e) {
    for (std::size_t v = 0; v < num_vertices; ++v) {
      problem.matrix[e][v] = catalog[v].table()[e];
    }
    problem.rhs[e] = box.table()[e];
  }
  for (std::size_t v = 0; v < num_vertices; ++v) problem.matrix[16][v] = 1;
  problem.rhs[16] = 1;
  return problem;
}

std::array<BipartiteBox, kNumCatalogVertices> build_catalog() {
  auto vertex = [](std::size_t i) {
    if (i < kNumProductVertices) {
      return BipartiteBox::product(SBox::from_index(static_cast<int>(i / 4)),
                                   SBox::from_index(static_cast<int>(i % 4)));
    }
    return BipartiteBox::pr_box(
        PRBox::from_index(static_cast<int>(i - kNumProductVertices)));
  };
  return [&]<std::size_t... I>(std::index_sequence<I...>) {
    return std::array<BipartiteBox, kNumCatalogVertices>{vertex(I)...};
  }(std::make_index_sequence<kNumCatalogVertices>{});
}

}  // namespace

const std::array<BipartiteBox, kNumCatalogVertices>& vertex_catalog() {
  static const auto catalog = build_catalog();
  return catalog;
}

std::string catalog_label(std::size_t index) {
  if (index < kNumProductVertices) {
    return to_string(SBox::from_index(static_cast<int>(index / 4))) + "x" +
           to_string(SBox::from_index(static_cast<int>(index % 4)));
  }
  if (index < kNumCatalogVertices) {
    return to_string(PRBox::from_index(static_cast<int>(index - kNumProductVertices)));
  }
  throw ValidationError("catalog index out of range");
}

std::uint64_t catalog_fingerprint() {
  std::uint64_t hash = 14695981039346656037ULL;
  auto feed = [&hash](const std::string& text) {
    for (unsigned char c : text) {
      hash ^= c;
      hash *= 1099511628211ULL;
    }
  };
  const auto& catalog = vertex_catalog();
  for (std::size_t i = 0; i < kNumCatalogVertices; ++i) {
    feed(catalog_label(i));
    feed(":");
    for (const auto& p : catalog[i].table()) {
      feed(to_string(p));
      feed(",");
    }
    feed(";");
  }
  return hash;
}

std::string catalog_fingerprint_hex() {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(catalog_fingerprint()));
  return buf;
}

NonlocalEnsemble decompose(const BipartiteBox& box) {
  require_2x2_no_signalling(box);
  const auto result = lp::lexicographic_min_point(vertex_problem(box, kNumCatalogVertices));
  if (result.status != lp::Status::kOptimal) {
    throw InfeasibleError("box lies outside the no-signalling polytope");
  }
  std::array<Prob, kNumCatalogVertices> weights;
  for (std::size_t i = 0; i < kNumCatalogVertices; ++i) weights[i] = result.point[i];
  return NonlocalEnsemble::from_catalog_weights(weights);
}

std::optional<NonlocalEnsemble> local_decomposition(const BipartiteBox& box) {
  require_2x2_no_signalling(box);
  const auto result = lp::find_feasible(vertex_problem(box, kNumProductVertices));
  if (result.status != lp::Status::kOptimal) return std::nullopt;
  std::array<Prob, kNumCatalogVertices> weights{};
  for (std::size_t i = 0; i < kNumProductVertices; ++i) weights[i] = result.point[i];
  return NonlocalEnsemble::from_catalog_weights(weights);
}

bool is_local(const BipartiteBox& box) { return local_decomposition(box).has_value(); }

std::array<Rational, 8> chsh_values(const BipartiteBox& box) {
  if (!box.is_2x2()) throw ValidationError("CHSH needs a 2x2x2x2 box");
  std::array<std::array<Rational, 2>, 2> correlator{};
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          if ((a ^ b) == 0) {
            correlator[x][y] += box.at(x, y, a, b);
          } else {
            correlator[x][y] -= box.at(x, y, a, b);
          }
        }
  std::array<Rational, 8> values{};
  for (int alpha = 0; alpha < 2; ++alpha)
    for (int beta = 0; beta < 2; ++beta)
      for (int gamma = 0; gamma < 2; ++gamma) {
        Rational sum = 0;
        for (int x = 0; x < 2; ++x)
          for (int y = 0; y < 2; ++y) {
            const int sign = (((x ^ alpha) & (y ^ beta)) ^ gamma) & 1;
            if (sign == 0) {
              sum += correlator[x][y];
            } else {
              sum -= correlator[x][y];
            }
          }
        values[static_cast<std::size_t>(4 * alpha + 2 * beta + gamma)] = sum;
      }
  return values;
}

bool satisfies_chsh_facets(const BipartiteBox& box) {
  for (const auto& v : chsh_values(box)) {
    if (v > 2) return false;
  }
  return true;
}

}  // namespace nsbox
