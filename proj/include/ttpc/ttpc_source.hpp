#pragma once

// Four-mode source with totally three-party correlations, built from two
// EPR pairs (a1,a2) and (a3,a4) whose inner halves meet on a 50% beamsplitter
// with a pi/2 relative phase:
//
//   b1 = a1,  b2 = (a2 + i a3)/sqrt2,  b3 = a4,  b4 = (a2 - i a3)/sqrt2.
//
// Mode k of the resulting state is b_{k+1}; station k holds it.

#include <array>
#include <cstddef>
#include <string_view>

#include "ttpc/quadrature.hpp"

namespace ttpc {

inline constexpr std::size_t kTtpcModes = 4;

inline constexpr std::size_t kModeB1 = 0;
inline constexpr std::size_t kModeB2 = 1;
inline constexpr std::size_t kModeB3 = 2;
inline constexpr std::size_t kModeB4 = 3;

struct TtpcState {
  GaussianState state;
  /// Seed quadratures (X01,Y01,...,X04,Y04) -> (X_b1,Y_b1,...,X_b4,Y_b4).
  SymplecticOp seed_to_output;
  double r = 0.0;
  /// e^{-2r}
  double s = 1.0;
};

/// Both EPR pairs share squeezing r. Throws std::invalid_argument for r < 0.
TtpcState build_ttpc(double r);

/// Extension: pair (a1,a2) squeezed by r12 and (a3,a4) by r34. `r` and `s`
/// of the result describe r12.
TtpcState build_ttpc_asymmetric(double r12, double r34);

enum class RelationId { I, II, III, IV, V, VI, VII, VIII };

inline constexpr std::array<RelationId, 8> kAllRelations{
    RelationId::I,  RelationId::II,  RelationId::III, RelationId::IV,
    RelationId::V,  RelationId::VI,  RelationId::VII, RelationId::VIII};

std::string_view to_string(RelationId id);

struct CorrelationRelation {
  RelationId id;
  LinearForm form;  // over the eight output quadratures
};

/// Three-party quadrature combination whose variance vanishes as r grows.
CorrelationRelation relation(RelationId id);

/// Variance of the relation's combination in the given source; 4 e^{-2r}.
double correlation_variance(const TtpcState& ttpc, RelationId id);

/// Closed form 4 e^{-2r} for any relation.
double correlation_variance_closed_form(double r);

/// The form re-expressed on the seed quadratures (the NOPA inputs).
Vector in_seed_coordinates(const TtpcState& ttpc, const LinearForm& form);

}  // namespace ttpc
