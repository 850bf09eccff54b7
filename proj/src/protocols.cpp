#include "ttpc/protocols.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ttpc {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kSqrt3 = std::numbers::sqrt3;
constexpr double kHalfPi = std::numbers::pi / 2.0;

void require_r(double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("r must be finite and >= 0");
}

std::string lower(std::string_view in) {
  std::string out(in);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

Eigen::Index quad_index(std::size_t mode, Quadrature q) {
  return static_cast<Eigen::Index>(q == Quadrature::X ? x_index(mode) : y_index(mode));
}

SpectrumReport symmetric_report(ProtocolId id, double r, GainPair gains, double noise,
                                double signal_gain) {
  return {id, r, gains, noise, noise, signal_gain, signal_gain};
}

}  // namespace

std::string_view to_string(ProtocolId id) {
  switch (id) {
    case ProtocolId::AB: return "ab";
    case ProtocolId::AC: return "ac";
    case ProtocolId::AB_CD: return "ab_cd";
    case ProtocolId::AC_BD: return "ac_bd";
    case ProtocolId::AB_D: return "ab_d";
    case ProtocolId::AC_D: return "ac_d";
  }
  return "?";
}

ProtocolId protocol_from_string(std::string_view name) {
  const std::string key = lower(name);
  for (ProtocolId id : kAllProtocols)
    if (to_string(id) == key) return id;
  throw std::invalid_argument("unknown protocol '" + std::string(name) + "'");
}

bool is_assisted(ProtocolId id) { return id != ProtocolId::AB && id != ProtocolId::AC; }

std::string_view to_string(Station station) {
  switch (station) {
    case Station::Alice: return "Alice";
    case Station::Bob: return "Bob";
    case Station::Claire: return "Claire";
    case Station::Daisy: return "Daisy";
  }
  return "?";
}

Station station_from_string(std::string_view name) {
  const std::string key = lower(name);
  for (Station st : kAllStations)
    if (lower(to_string(st)) == key) return st;
  throw std::invalid_argument("unknown station '" + std::string(name) + "'");
}

void validate(const ProtocolSpec& spec) {
  if (spec.sender == spec.receiver) throw std::invalid_argument("protocol: sender equals receiver");
  for (std::size_t k = 0; k < spec.controllers.size(); ++k) {
    const Station c = spec.controllers[k];
    if (c == spec.sender || c == spec.receiver)
      throw std::invalid_argument("protocol: controller overlaps sender or receiver");
    for (std::size_t m = k + 1; m < spec.controllers.size(); ++m)
      if (spec.controllers[m] == c) throw std::invalid_argument("protocol: duplicate controller");
  }
  if (spec.signal_mode != held_mode(spec.sender))
    throw std::invalid_argument("protocol: signal must ride on the sender's mode");
  for (const OpticalStep& step : spec.optical_steps) {
    if (step.mode_i >= kTtpcModes || step.mode_j >= kTtpcModes || step.mode_i == step.mode_j)
      throw std::invalid_argument("protocol: optical step modes invalid");
    if (!(step.t > 0.0 && step.t < 1.0))
      throw std::invalid_argument("protocol: beamsplitter transmittance outside (0,1)");
  }
  for (const PhotocurrentSpec* pc : {&spec.plus, &spec.minus}) {
    if (pc->terms.empty()) throw std::invalid_argument("protocol: photocurrent has no detected terms");
    for (const DetectedTerm& term : pc->terms)
      if (term.mode >= kTtpcModes || !std::isfinite(term.weight))
        throw std::invalid_argument("protocol: detected term invalid");
    if (!pc->feedforward) continue;
    const Feedforward& ff = *pc->feedforward;
    if (std::find(spec.controllers.begin(), spec.controllers.end(), ff.controller) ==
        spec.controllers.end())
      throw std::invalid_argument("protocol: feedforward from a station that is not a controller");
    const std::size_t mode = held_mode(ff.controller);
    for (const OpticalStep& step : spec.optical_steps)
      if (step.mode_i == mode || step.mode_j == mode)
        throw std::invalid_argument("protocol: feedforward mode is routed through the network");
    for (const DetectedTerm& term : pc->terms)
      if (term.mode == mode)
        throw std::invalid_argument("protocol: feedforward mode is also detected by the receiver");
  }
}

ProtocolSpec protocol_spec(ProtocolId id) {
  ProtocolSpec spec;
  spec.id = id;
  spec.sender = Station::Alice;
  spec.signal_mode = kModeB1;
  switch (id) {
    case ProtocolId::AB:
      // Bell detection: 50% BS, X on the first port, Y on the second.
      spec.receiver = Station::Bob;
      spec.optical_steps = {{0.5, 0.0, kModeB1, kModeB2}};
      spec.plus.terms = {{kModeB1, Quadrature::X, 1.0}};
      spec.minus.terms = {{kModeB2, Quadrature::Y, 1.0}};
      spec.description = "i+ = (X_b2 + X_b1')/sqrt2, i- = (Y_b2 - Y_b1')/sqrt2";
      break;
    case ProtocolId::AC:
      spec.receiver = Station::Claire;
      spec.optical_steps = {{0.5, 0.0, kModeB1, kModeB3}};
      spec.plus.terms = {{kModeB1, Quadrature::X, 1.0}};
      spec.minus.terms = {{kModeB3, Quadrature::Y, 1.0}};
      spec.description = "i+ = (X_b3 + X_b1')/sqrt2, i- = (Y_b3 - Y_b1')/sqrt2";
      break;
    case ProtocolId::AB_CD:
      spec.receiver = Station::Bob;
      spec.controllers = {Station::Claire, Station::Daisy};
      spec.optical_steps = {{2.0 / 3.0, 0.0, kModeB1, kModeB2}};
      spec.plus.terms = {{kModeB1, Quadrature::X, 1.0}};
      spec.plus.feedforward = Feedforward{Station::Daisy, Quadrature::X, 1.0};
      spec.minus.terms = {{kModeB2, Quadrature::Y, 1.0}};
      spec.minus.feedforward = Feedforward{Station::Claire, Quadrature::X, 1.0};
      spec.description =
          "1:2 BS; i+ = (sqrt2 X_b1' + X_b2)/sqrt3 + g_x X_b4, "
          "i- = (sqrt2 Y_b2 - Y_b1')/sqrt3 + g_y X_b3";
      break;
    case ProtocolId::AC_BD:
      // Of the four port/quadrature readouts after the pi/2 coupler, X on
      // both ports is the one that pairs with relations VII and VI.
      spec.receiver = Station::Claire;
      spec.controllers = {Station::Bob, Station::Daisy};
      spec.optical_steps = {{0.5, kHalfPi, kModeB1, kModeB3}};
      spec.plus.terms = {{kModeB1, Quadrature::X, 1.0}};
      spec.plus.feedforward = Feedforward{Station::Daisy, Quadrature::X, 1.0};
      spec.minus.terms = {{kModeB3, Quadrature::X, -1.0}};
      spec.minus.feedforward = Feedforward{Station::Bob, Quadrature::Y, -1.0};
      spec.description =
          "pi/2 50% BS; i+ = (X_b1' - Y_b3)/sqrt2 + g_x X_b4 (port 1 X), "
          "i- = (Y_b1' - X_b3)/sqrt2 - g_y Y_b2 (port 2 X, negated)";
      break;
    case ProtocolId::AB_D:
      spec.receiver = Station::Bob;
      spec.controllers = {Station::Daisy};
      spec.optical_steps = {{0.5, 0.0, kModeB2, kModeB4}, {0.5, 0.0, kModeB1, kModeB2}};
      spec.plus.terms = {{kModeB1, Quadrature::X, 1.0}};
      spec.minus.terms = {{kModeB2, Quadrature::Y, 1.0}};
      spec.description =
          "b_out = (b2 + b4)/sqrt2, then Bell detection of b1' and b_out; "
          "i+ = (X_out + X_b1')/sqrt2, i- = (Y_out - Y_b1')/sqrt2";
      break;
    case ProtocolId::AC_D:
      // Two cascaded 50% couplers: c = (b1' + i b3)/sqrt2, then c with b4.
      spec.receiver = Station::Claire;
      spec.controllers = {Station::Daisy};
      spec.optical_steps = {{0.5, kHalfPi, kModeB1, kModeB3}, {0.5, 0.0, kModeB1, kModeB4}};
      spec.plus.terms = {{kModeB1, Quadrature::X, 1.0}};
      spec.minus.terms = {{kModeB4, Quadrature::Y, -1.0}};
      spec.description =
          "pi/2 50% BS on (b1', b3), then 50% BS with b4; "
          "i+ = (X_b1' - Y_b3 + sqrt2 X_b4)/2, i- = (Y_b1' + X_b3 - sqrt2 Y_b4)/2";
      break;
  }
  return spec;
}

SymplecticOp network_op(const ProtocolSpec& spec) {
  SymplecticOp op = identity_op(kTtpcModes);
  for (const OpticalStep& step : spec.optical_steps)
    op = beamsplitter(step.t, step.phase, step.mode_i, step.mode_j, kTtpcModes).after(op);
  return op;
}

std::array<LinearForm, 2> measured_forms(const ProtocolSpec& spec, GainPair gains) {
  validate(spec);
  const SymplecticOp net = network_op(spec);
  std::array<LinearForm, 2> forms{LinearForm::zero(kTtpcModes), LinearForm::zero(kTtpcModes)};
  const std::array<const PhotocurrentSpec*, 2> currents{&spec.plus, &spec.minus};
  const std::array<double, 2> gain{gains.g_x, gains.g_y};
  for (std::size_t k = 0; k < 2; ++k) {
    Vector& c = forms[k].coeffs;
    for (const DetectedTerm& term : currents[k]->terms)
      c(quad_index(term.mode, term.quadrature)) += term.weight;
    if (const auto& ff = currents[k]->feedforward)
      c(quad_index(held_mode(ff->controller), ff->quadrature)) += ff->sign * gain[k];
    // The signal displaces the sender's mode before the network.
    const Vector pulled_back = net.matrix.transpose() * c;
    forms[k].signal_coeffs = {pulled_back(quad_index(spec.signal_mode, Quadrature::X)),
                              pulled_back(quad_index(spec.signal_mode, Quadrature::Y))};
  }
  return forms;
}

SpectrumReport engine_spectra(const ProtocolSpec& spec, double r, GainPair gains) {
  require_r(r);
  const auto forms = measured_forms(spec, gains);
  const TtpcState source = build_ttpc(r);
  const GaussianState out = apply(network_op(spec), source.state);
  SpectrumReport report;
  report.id = spec.id;
  report.r = r;
  report.gains = gains;
  report.noise_plus = linear_form_variance(out, forms[0]).quantum;
  report.noise_minus = linear_form_variance(out, forms[1]).quantum;
  report.signal_gain_plus = forms[0].signal_coeffs[0] * forms[0].signal_coeffs[0];
  report.signal_gain_minus = forms[1].signal_coeffs[1] * forms[1].signal_coeffs[1];
  return report;
}

double signal_crosstalk(const ProtocolSpec& spec, GainPair gains) {
  const auto forms = measured_forms(spec, gains);
  return std::max(forms[0].signal_coeffs[1] * forms[0].signal_coeffs[1],
                  forms[1].signal_coeffs[0] * forms[1].signal_coeffs[0]);
}

SpectrumReport spectra_ab_unassisted(double r) {
  require_r(r);
  // [(4 - 2sqrt2) + (4 + 2sqrt2) s^2] / (8s) written in e^{+-2r}.
  const double noise =
      ((4.0 - 2.0 * kSqrt2) * std::exp(2.0 * r) + (4.0 + 2.0 * kSqrt2) * std::exp(-2.0 * r)) / 8.0;
  return symmetric_report(ProtocolId::AB, r, {}, noise, 0.5);
}

SpectrumReport spectra_ac_unassisted(double r) {
  require_r(r);
  return symmetric_report(ProtocolId::AC, r, {}, std::cosh(2.0 * r), 0.5);
}

SpectrumReport spectra_ab_two_controllers(double r, GainPair gains) {
  require_r(r);
  const double up = std::exp(2.0 * r);
  const double down = std::exp(-2.0 * r);
  const double gx = kSqrt3 * gains.g_x;
  const double gy = kSqrt3 * gains.g_y;
  SpectrumReport report;
  report.id = ProtocolId::AB_CD;
  report.r = r;
  report.gains = gains;
  report.noise_plus =
      (2.0 * (1.0 - gx) * (1.0 - gx) * up + ((3.0 + gx) * (3.0 + gx) + (gx - 1.0) * (gx - 1.0)) * down) /
      12.0;
  report.noise_minus = ((gy - 1.0) * (gy - 1.0) * up + (4.0 + (gy + 1.0) * (gy + 1.0)) * down) / 6.0;
  report.signal_gain_plus = 2.0 / 3.0;
  report.signal_gain_minus = 1.0 / 3.0;
  return report;
}

SpectrumReport spectra_ac_two_controllers(double r, GainPair gains) {
  require_r(r);
  // cosh2r (1 + g^2) - 2 g sinh2r; at g = tanh 2r this is 2 e^{-2r}/(e^{-4r} + 1).
  const double c = std::cosh(2.0 * r);
  const double s = std::sinh(2.0 * r);
  auto noise = [&](double g) { return c * (1.0 + g * g) - 2.0 * g * s; };
  SpectrumReport report;
  report.id = ProtocolId::AC_BD;
  report.r = r;
  report.gains = gains;
  report.noise_plus = noise(gains.g_x);
  report.noise_minus = noise(gains.g_y);
  report.signal_gain_plus = 0.5;
  report.signal_gain_minus = 0.5;
  return report;
}

SpectrumReport spectra_ab_one_controller(double r) {
  require_r(r);
  return symmetric_report(ProtocolId::AB_D, r, {}, std::exp(-2.0 * r), 0.5);
}

SpectrumReport spectra_ac_one_controller(double r) {
  require_r(r);
  return symmetric_report(ProtocolId::AC_D, r, {}, std::exp(-2.0 * r), 0.25);
}

GainPair optimal_gains_ab(double r) {
  require_r(r);
  const double g = std::tanh(2.0 * r) / kSqrt3;
  return {g, g};
}

GainPair optimal_gains_ac(double r) {
  require_r(r);
  const double g = std::tanh(2.0 * r);
  return {g, g};
}

GainPair optimal_gains(ProtocolId id, double r) {
  switch (id) {
    case ProtocolId::AB_CD: return optimal_gains_ab(r);
    case ProtocolId::AC_BD: return optimal_gains_ac(r);
    default: require_r(r); return {};
  }
}

SpectrumReport closed_form_spectra(ProtocolId id, double r, GainPair gains) {
  switch (id) {
    case ProtocolId::AB: return spectra_ab_unassisted(r);
    case ProtocolId::AC: return spectra_ac_unassisted(r);
    case ProtocolId::AB_CD: return spectra_ab_two_controllers(r, gains);
    case ProtocolId::AC_BD: return spectra_ac_two_controllers(r, gains);
    case ProtocolId::AB_D: return spectra_ab_one_controller(r);
    case ProtocolId::AC_D: return spectra_ac_one_controller(r);
  }
  throw std::invalid_argument("closed_form_spectra: unknown protocol");
}

SpectrumReport closed_form_spectra(ProtocolId id, double r) {
  return closed_form_spectra(id, r, optimal_gains(id, r));
}

double ab_unassisted_snl_crossing() { return 3.0 - 2.0 * kSqrt2; }

double squeezing_db(double r) { return 20.0 * r / std::numbers::ln10; }

double r_from_db(double db) { return db * std::numbers::ln10 / 20.0; }

}  // namespace ttpc
