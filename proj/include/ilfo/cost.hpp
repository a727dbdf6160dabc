#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ilfo/types.hpp"

namespace ilfo {

enum class CostKind { Euclidean, SquaredEuclidean, Cosine };

inline CostKind cost_kind_from_string(const std::string& s) {
  if (s == "euclidean") return CostKind::Euclidean;
  if (s == "squared_euclidean") return CostKind::SquaredEuclidean;
  if (s == "cosine") return CostKind::Cosine;
  throw std::invalid_argument("unknown cost kind: '" + s + "'");
}

inline std::string to_string(CostKind k) {
  switch (k) {
    case CostKind::Euclidean: return "euclidean";
    case CostKind::SquaredEuclidean: return "squared_euclidean";
    case CostKind::Cosine: return "cosine";
  }
  return "euclidean";
}

// Pairwise observation cost. Symmetric and nonnegative for every kind;
// cosine is 1 - cosine similarity and rejects zero vectors.
struct CostFunction {
  CostKind kind = CostKind::Euclidean;

  double operator()(const Observation& a, const Observation& b) const {
    if (a.size() != b.size()) {
      throw std::invalid_argument("cost: dimension mismatch " + std::to_string(a.size()) +
                                  " vs " + std::to_string(b.size()));
    }
    switch (kind) {
      case CostKind::Euclidean:
        return (a - b).norm();
      case CostKind::SquaredEuclidean:
        return (a - b).squaredNorm();
      case CostKind::Cosine: {
        const double na = a.norm(), nb = b.norm();
        if (na == 0.0 || nb == 0.0) {
          throw std::domain_error("cosine cost undefined for zero vectors");
        }
        return std::max(0.0, 1.0 - a.dot(b) / (na * nb));
      }
    }
    return 0.0;
  }
};

}  // namespace ilfo
