#pragma once

// The six dense-coding scenarios on the four-station network. Each has a
// closed-form noise spectrum and a declarative ProtocolSpec that the engine
// (or the Monte Carlo harness) evaluates independently.

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ttpc/quadrature.hpp"
#include "ttpc/ttpc_source.hpp"

namespace ttpc {

enum class ProtocolId { AB, AC, AB_CD, AC_BD, AB_D, AC_D };

inline constexpr std::array<ProtocolId, 6> kAllProtocols{
    ProtocolId::AB, ProtocolId::AC, ProtocolId::AB_CD,
    ProtocolId::AC_BD, ProtocolId::AB_D, ProtocolId::AC_D};

/// "ab", "ac", "ab_cd", "ac_bd", "ab_d", "ac_d"
std::string_view to_string(ProtocolId id);
/// Accepts the lower-case names above (case-insensitive). Throws on unknown.
ProtocolId protocol_from_string(std::string_view name);
bool is_assisted(ProtocolId id);

enum class Station { Alice, Bob, Claire, Daisy };

inline constexpr std::array<Station, 4> kAllStations{Station::Alice, Station::Bob,
                                                     Station::Claire, Station::Daisy};

std::string_view to_string(Station station);
Station station_from_string(std::string_view name);
/// Alice holds b1, Bob b2, Claire b3, Daisy b4.
constexpr std::size_t held_mode(Station station) { return static_cast<std::size_t>(station); }

enum class Quadrature { X, Y };

struct OpticalStep {
  double t = 0.5;
  double phase = 0.0;
  std::size_t mode_i = 0;
  std::size_t mode_j = 1;
};

/// weight * (quadrature of `mode` after the optical network)
struct DetectedTerm {
  std::size_t mode = 0;
  Quadrature quadrature = Quadrature::X;
  double weight = 1.0;
};

/// Electronic feedforward: the controller homodynes its own mode and the
/// receiver adds sign * gain * outcome to the photocurrent.
struct Feedforward {
  Station controller = Station::Claire;
  Quadrature quadrature = Quadrature::X;
  double sign = 1.0;
};

struct PhotocurrentSpec {
  std::vector<DetectedTerm> terms;
  std::optional<Feedforward> feedforward;
};

struct GainPair {
  double g_x = 0.0;  // feedforward gain on i+
  double g_y = 0.0;  // feedforward gain on i-
};

struct ProtocolSpec {
  ProtocolId id = ProtocolId::AB;
  Station sender = Station::Alice;
  Station receiver = Station::Bob;
  std::vector<Station> controllers;
  std::vector<OpticalStep> optical_steps;
  PhotocurrentSpec plus;   // i+
  PhotocurrentSpec minus;  // i-
  std::size_t signal_mode = kModeB1;
  std::string description;
};

/// Throws std::invalid_argument when stations overlap, modes are out of
/// range, a beamsplitter ratio is outside (0,1), or a feedforward controller
/// is not listed or has its mode routed through the optical network.
void validate(const ProtocolSpec& spec);

/// Built-in network for each scenario.
ProtocolSpec protocol_spec(ProtocolId id);

/// Composition of the spec's optical steps on the four modes.
SymplecticOp network_op(const ProtocolSpec& spec);

/// i+ and i- as linear forms on the post-network quadratures, gains folded
/// in, with signal weights propagated from the sender's displacement.
std::array<LinearForm, 2> measured_forms(const ProtocolSpec& spec, GainPair gains);

struct SpectrumReport {
  ProtocolId id = ProtocolId::AB;
  double r = 0.0;
  GainPair gains;
  double noise_plus = 0.0;         // SNU
  double noise_minus = 0.0;        // SNU
  double signal_gain_plus = 0.0;   // multiplies V_Xs
  double signal_gain_minus = 0.0;  // multiplies V_Ys
};

/// Engine route: TTPC state -> optical steps -> detected forms.
SpectrumReport engine_spectra(const ProtocolSpec& spec, double r, GainPair gains);

/// Largest squared weight of the wrong signal quadrature (Y_s in i+, X_s in i-).
double signal_crosstalk(const ProtocolSpec& spec, GainPair gains);

// Closed forms. All require r >= 0.
SpectrumReport spectra_ab_unassisted(double r);
SpectrumReport spectra_ac_unassisted(double r);
SpectrumReport spectra_ab_two_controllers(double r, GainPair gains);
SpectrumReport spectra_ac_two_controllers(double r, GainPair gains);
SpectrumReport spectra_ab_one_controller(double r);
SpectrumReport spectra_ac_one_controller(double r);

/// (tanh 2r)/sqrt3 on both quadratures.
GainPair optimal_gains_ab(double r);
/// tanh 2r on both quadratures.
GainPair optimal_gains_ac(double r);
/// Zero gains for protocols without electronic feedforward.
GainPair optimal_gains(ProtocolId id, double r);

/// Dispatches to the closed form for `id`; gains only matter for AB_CD/AC_BD.
SpectrumReport closed_form_spectra(ProtocolId id, double r, GainPair gains);
SpectrumReport closed_form_spectra(ProtocolId id, double r);

/// Squeezing degree at which unassisted AB noise equals the shot-noise
/// limit: the root s = 3 - 2 sqrt2 of (4+2sqrt2)s^2 - 8s + (4-2sqrt2) = 0.
double ab_unassisted_snl_crossing();

inline double squeezing_degree(double r) { return std::exp(-2.0 * r); }
/// -10 log10(s)
double squeezing_db(double r);
double r_from_db(double db);

std::string protocol_to_json(const ProtocolSpec& spec);
ProtocolSpec protocol_from_json(std::string_view text);

}  // namespace ttpc
