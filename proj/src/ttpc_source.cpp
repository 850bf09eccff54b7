#include "ttpc/ttpc_source.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ttpc {

TtpcState build_ttpc_asymmetric(double r12, double r34) {
  if (!(r12 >= 0.0) || !(r34 >= 0.0)) throw std::invalid_argument("build_ttpc: r must be >= 0");
  constexpr double half_pi = std::numbers::pi / 2.0;
  // cos(pi/2) leaves entries of order 1e-17; round them off so the passive
  // part of the source is literal.
  auto literal = [](SymplecticOp op) {
    op.matrix = op.matrix.unaryExpr([](double v) { return std::abs(v) < 1e-15 ? 0.0 : v; });
    return op;
  };
  // Slots 0..3 hold a1..a4 after the squeezers.
  SymplecticOp op = two_mode_squeezer(r12, 0, 1, kTtpcModes);
  op = two_mode_squeezer(r34, 2, 3, kTtpcModes).after(op);
  // Slot 1 -> (a2 + i a3)/sqrt2, slot 2 -> (i a2 + a3)/sqrt2.
  op = literal(beamsplitter(0.5, half_pi, 1, 2, kTtpcModes)).after(op);
  // Remove the i on the second output so it reads (a2 - i a3)/sqrt2.
  op = literal(phase_shift(-half_pi, 2, kTtpcModes)).after(op);
  op = mode_swap(2, 3, kTtpcModes).after(op);
  op.description = "TTPC source";

  GaussianState state = apply(op, vacuum_state(kTtpcModes));
  return {std::move(state), std::move(op), r12, std::exp(-2.0 * r12)};
}

TtpcState build_ttpc(double r) { return build_ttpc_asymmetric(r, r); }

std::string_view to_string(RelationId id) {
  switch (id) {
    case RelationId::I: return "I";
    case RelationId::II: return "II";
    case RelationId::III: return "III";
    case RelationId::IV: return "IV";
    case RelationId::V: return "V";
    case RelationId::VI: return "VI";
    case RelationId::VII: return "VII";
    case RelationId::VIII: return "VIII";
  }
  return "?";
}

CorrelationRelation relation(RelationId id) {
  const double rt2 = std::numbers::sqrt2;
  LinearForm form = LinearForm::zero(kTtpcModes);
  Vector& c = form.coeffs;
  auto X = [&](std::size_t m) -> double& { return c(static_cast<Eigen::Index>(x_index(m))); };
  auto Y = [&](std::size_t m) -> double& { return c(static_cast<Eigen::Index>(y_index(m))); };
  switch (id) {
    case RelationId::I:  // sqrt2 X1 + X2 + X4
      X(kModeB1) = rt2; X(kModeB2) = 1; X(kModeB4) = 1;
      break;
    case RelationId::II:  // Y2 + sqrt2 X3 - Y4
      Y(kModeB2) = 1; X(kModeB3) = rt2; Y(kModeB4) = -1;
      break;
    case RelationId::III:  // -sqrt2 Y1 + Y2 + Y4
      Y(kModeB1) = -rt2; Y(kModeB2) = 1; Y(kModeB4) = 1;
      break;
    case RelationId::IV:  // X2 + sqrt2 Y3 - X4
      X(kModeB2) = 1; Y(kModeB3) = rt2; X(kModeB4) = -1;
      break;
    case RelationId::V:  // Y1 + X3 - sqrt2 Y4
      Y(kModeB1) = 1; X(kModeB3) = 1; Y(kModeB4) = -rt2;
      break;
    case RelationId::VI:  // -Y1 + sqrt2 Y2 + X3
      Y(kModeB1) = -1; Y(kModeB2) = rt2; X(kModeB3) = 1;
      break;
    case RelationId::VII:  // X1 - Y3 + sqrt2 X4
      X(kModeB1) = 1; Y(kModeB3) = -1; X(kModeB4) = rt2;
      break;
    case RelationId::VIII:  // X1 + sqrt2 X2 + Y3
      X(kModeB1) = 1; X(kModeB2) = rt2; Y(kModeB3) = 1;
      break;
  }
  return {id, std::move(form)};
}

double correlation_variance(const TtpcState& ttpc, RelationId id) {
  return linear_form_variance(ttpc.state, relation(id).form).quantum;
}

double correlation_variance_closed_form(double r) { return 4.0 * std::exp(-2.0 * r); }

Vector in_seed_coordinates(const TtpcState& ttpc, const LinearForm& form) {
  return ttpc.seed_to_output.matrix.transpose() * form.coeffs;
}

}  // namespace ttpc
