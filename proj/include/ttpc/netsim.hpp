#pragma once

// Monte Carlo harness for the four-station network.
//
// Each sample draws the eight seed quadratures and the two classical signal
// values, pushes them through the source and the protocol's optical network,
// and lets the stations exchange classical messages (controller homodyne
// outcomes, gain instructions) before the receiver forms i+ and i-.
//
// Random numbers: one std::mt19937_64 stream per run, seeded with `seed`.
// Uniforms are ((x >> 11) + 0.5) * 2^-53; normals come from the Box-Muller
// transform, cosine branch first. Per sample the draw order is
// X01, Y01, ..., X04, Y04, X_s, Y_s.

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ttpc/protocols.hpp"

namespace ttpc {

inline constexpr const char* kGeneratorFamily = "mt19937_64/box-muller";

/// Standard normal variates from a seeded mt19937_64.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}
  double next();

 private:
  double uniform();
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

enum class StationRole { Sender, Receiver, Controller, Idle };

struct StationInfo {
  Station name = Station::Alice;
  std::size_t held_mode = 0;
  StationRole role = StationRole::Idle;
};

std::array<StationInfo, 4> station_layout(const ProtocolSpec& spec);

enum class MessageKind { MeasuredQuadrature, GainInstruction };

std::string_view to_string(MessageKind kind);

struct ClassicalMessage {
  Station from = Station::Alice;
  Station to = Station::Bob;
  MessageKind kind = MessageKind::MeasuredQuadrature;
  double value = 0.0;
  std::int64_t sample_index = 0;
};

/// {"sample":..,"from":..,"to":..,"kind":..,"value":..}
std::string to_ndjson(const ClassicalMessage& msg);

/// In-order mailbox per station with a ledger of sends and receipts.
class MessageBus {
 public:
  explicit MessageBus(std::ostream* trace = nullptr) : trace_(trace) {}

  void send(const ClassicalMessage& msg);
  /// Pops the oldest message for `to`; throws std::logic_error if it is not
  /// from `from`, not of `kind`, or belongs to another sample.
  ClassicalMessage receive(Station to, Station from, MessageKind kind, std::int64_t sample_index);

  std::uint64_t sent() const { return sent_; }
  std::uint64_t consumed() const { return consumed_; }
  bool drained() const;

 private:
  std::array<std::deque<ClassicalMessage>, 4> queues_;
  std::uint64_t sent_ = 0;
  std::uint64_t consumed_ = 0;
  std::ostream* trace_;
};

struct McOptions {
  std::size_t n_samples = 1'000'000;
  std::uint64_t seed = 42;
  /// Gains the stations actually use; defaults to the protocol's optimum.
  std::optional<GainPair> gains;
  /// Worker threads; results do not depend on this.
  std::size_t threads = 1;
  /// Optional NDJSON message trace (forces a serial run).
  std::ostream* trace = nullptr;
};

struct McEstimate {
  ProtocolId id = ProtocolId::AB;
  double r = 0.0;
  double sigma2 = 0.0;
  GainPair gains;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  /// Residual variance of i+/i- after regressing out the sent signal.
  double noise_plus_hat = 0.0;
  double noise_minus_hat = 0.0;
  double total_plus_hat = 0.0;
  double total_minus_hat = 0.0;
  /// Regression weight of X_s in i+ and Y_s in i-.
  double signal_weight_plus_hat = 0.0;
  double signal_weight_minus_hat = 0.0;
  double snr_x_hat = 0.0;
  double snr_y_hat = 0.0;
  double stderr_noise_plus = 0.0;
  double stderr_noise_minus = 0.0;
  double stderr_snr_x = 0.0;
  double stderr_snr_y = 0.0;
  std::uint64_t messages_sent = 0;
  std::uint64_t messages_consumed = 0;
};

/// Throws std::invalid_argument for n_samples < 2, negative r or sigma2, or
/// an invalid spec.
McEstimate sample_run(const ProtocolSpec& spec, double r, double sigma2, const McOptions& options);

std::string to_json(const McEstimate& estimate);

struct McCheck {
  std::string quantity;
  double estimate = 0.0;
  double expected = 0.0;
  double standard_error = 0.0;
  double z = 0.0;
  bool pass = false;
};

struct McComparison {
  McEstimate estimate;
  SpectrumReport analytic;  // closed form at the protocol's optimal gains
  std::vector<McCheck> checks;
  bool low_power = false;
  bool pass = false;
};

inline constexpr double kMcSigmaThreshold = 5.0;
inline constexpr std::size_t kMcLowPowerSamples = 1000;

/// Flags every estimate farther than 5 standard errors from the closed form.
/// The stderr of a variance v is v sqrt(2/(n-1)).
McComparison compare_mc_analytic(const ProtocolSpec& spec, double r, double sigma2,
                                 const McOptions& options);

}  // namespace ttpc
