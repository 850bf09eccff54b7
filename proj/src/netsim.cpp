#include "ttpc/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "ttpc/capacity.hpp"

namespace ttpc {

double NormalStream::uniform() {
  // 53 random bits, shifted off zero so the log below is finite.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double NormalStream::next() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

std::array<StationInfo, 4> station_layout(const ProtocolSpec& spec) {
  std::array<StationInfo, 4> layout;
  for (Station st : kAllStations) {
    StationInfo& info = layout[held_mode(st)];
    info.name = st;
    info.held_mode = held_mode(st);
    if (st == spec.sender) {
      info.role = StationRole::Sender;
    } else if (st == spec.receiver) {
      info.role = StationRole::Receiver;
    } else if (std::find(spec.controllers.begin(), spec.controllers.end(), st) != spec.controllers.end()) {
      info.role = StationRole::Controller;
    }
  }
  return layout;
}

std::string_view to_string(MessageKind kind) {
  return kind == MessageKind::MeasuredQuadrature ? "measured-quadrature" : "gain-instruction";
}

std::string to_ndjson(const ClassicalMessage& msg) {
  nlohmann::json j{{"sample", msg.sample_index},
                   {"from", to_string(msg.from)},
                   {"to", to_string(msg.to)},
                   {"kind", to_string(msg.kind)},
                   {"value", msg.value}};
  return j.dump();
}

void MessageBus::send(const ClassicalMessage& msg) {
  queues_[held_mode(msg.to)].push_back(msg);
  ++sent_;
  if (trace_) *trace_ << to_ndjson(msg) << '\n';
}

ClassicalMessage MessageBus::receive(Station to, Station from, MessageKind kind,
                                     std::int64_t sample_index) {
  auto& queue = queues_[held_mode(to)];
  if (queue.empty()) throw std::logic_error("MessageBus: no message waiting for " + std::string(to_string(to)));
  ClassicalMessage msg = queue.front();
  if (msg.from != from || msg.kind != kind || msg.sample_index != sample_index) {
    std::ostringstream err;
    err << "MessageBus: " << to_string(to) << " expected " << to_string(kind) << " from "
        << to_string(from) << " for sample " << sample_index << ", got " << to_ndjson(msg);
    throw std::logic_error(err.str());
  }
  queue.pop_front();
  ++consumed_;
  return msg;
}

bool MessageBus::drained() const {
  for (const auto& q : queues_)
    if (!q.empty()) return false;
  return true;
}

namespace {

constexpr std::size_t kDim = 2 * kTtpcModes;
constexpr std::size_t kDrawsPerSample = kDim + 2;
constexpr std::size_t kChunkSamples = 1 << 14;

using Mat8 = std::array<double, kDim * kDim>;
using Vec8 = std::array<double, kDim>;

Mat8 to_array(const Matrix& m) {
  Mat8 out{};
  for (std::size_t i = 0; i < kDim; ++i)
    for (std::size_t j = 0; j < kDim; ++j)
      out[i * kDim + j] = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return out;
}

Vec8 multiply(const Mat8& m, const Vec8& v) {
  Vec8 out{};
  for (std::size_t i = 0; i < kDim; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < kDim; ++j) acc += m[i * kDim + j] * v[j];
    out[i] = acc;
  }
  return out;
}

/// Running means and co-moments of (i+, i-, X_s, Y_s); mergeable.
struct Moments {
  static constexpr std::size_t K = 4;
  double n = 0.0;
  std::array<double, K> mean{};
  std::array<std::array<double, K>, K> m2{};

  void add(const std::array<double, K>& x) {
    n += 1.0;
    std::array<double, K> delta{};
    for (std::size_t i = 0; i < K; ++i) {
      delta[i] = x[i] - mean[i];
      mean[i] += delta[i] / n;
    }
    for (std::size_t i = 0; i < K; ++i)
      for (std::size_t j = 0; j < K; ++j) m2[i][j] += delta[i] * (x[j] - mean[j]);
  }

  void merge(const Moments& other) {
    if (other.n == 0.0) return;
    if (n == 0.0) {
      *this = other;
      return;
    }
    const double total = n + other.n;
    std::array<double, K> delta{};
    for (std::size_t i = 0; i < K; ++i) delta[i] = other.mean[i] - mean[i];
    for (std::size_t i = 0; i < K; ++i)
      for (std::size_t j = 0; j < K; ++j) m2[i][j] += other.m2[i][j] + delta[i] * delta[j] * n * other.n / total;
    for (std::size_t i = 0; i < K; ++i) mean[i] += delta[i] * other.n / total;
    n = total;
  }
};

struct Current {
  Vec8 detected{};  // receiver's weights on post-network quadratures
  bool has_feedforward = false;
  Station controller = Station::Claire;
  std::size_t controller_quad = 0;
  double sign = 1.0;
  double gain = 0.0;
};

struct RunContext {
  Mat8 source{};
  Mat8 network{};
  std::array<Current, 2> currents;
  Station receiver = Station::Bob;
  std::size_t signal_x = 0;
  std::size_t signal_y = 1;
  double signal_sd = 0.0;
};

struct ChunkResult {
  Moments moments;
  std::uint64_t sent = 0;
  std::uint64_t consumed = 0;
};

ChunkResult run_chunk(const RunContext& ctx, const std::vector<double>& draws, std::size_t first_sample,
                      std::ostream* trace) {
  ChunkResult result;
  MessageBus bus(trace);
  const std::size_t count = draws.size() / kDrawsPerSample;
  for (std::size_t k = 0; k < count; ++k) {
    const double* z = draws.data() + k * kDrawsPerSample;
    const auto sample = static_cast<std::int64_t>(first_sample + k);
    Vec8 seeds{};
    std::copy(z, z + kDim, seeds.begin());
    const double xs = ctx.signal_sd * z[kDim];
    const double ys = ctx.signal_sd * z[kDim + 1];

    // Source output, then the sender's modulation.
    Vec8 modes = multiply(ctx.source, seeds);
    modes[ctx.signal_x] += xs;
    modes[ctx.signal_y] += ys;

    // Controllers homodyne their own modes and report to the receiver.
    for (const Current& c : ctx.currents)
      if (c.has_feedforward)
        bus.send({c.controller, ctx.receiver, MessageKind::MeasuredQuadrature, modes[c.controller_quad], sample});

    const Vec8 out = multiply(ctx.network, modes);

    std::array<double, Moments::K> row{0.0, 0.0, xs, ys};
    for (std::size_t q = 0; q < 2; ++q) {
      const Current& c = ctx.currents[q];
      double current = 0.0;
      for (std::size_t i = 0; i < kDim; ++i) current += c.detected[i] * out[i];
      if (c.has_feedforward) {
        const ClassicalMessage msg =
            bus.receive(ctx.receiver, c.controller, MessageKind::MeasuredQuadrature, sample);
        current += c.sign * c.gain * msg.value;
      }
      row[q] = current;
    }
    result.moments.add(row);
  }
  if (!bus.drained()) throw std::logic_error("MessageBus: undelivered messages at end of chunk");
  result.sent = bus.sent();
  result.consumed = bus.consumed();
  return result;
}

std::size_t quad_of(std::size_t mode, Quadrature q) { return q == Quadrature::X ? x_index(mode) : y_index(mode); }

double snr_stderr(double snr, double n) {
  if (snr <= 0.0) return 0.0;
  return snr * std::sqrt(2.0 / (n - 1.0) + 4.0 / (n * snr));
}

}  // namespace

McEstimate sample_run(const ProtocolSpec& spec, double r, double sigma2, const McOptions& options) {
  validate(spec);
  if (options.n_samples < 2) throw std::invalid_argument("sample_run: n_samples must be >= 2");
  if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("sample_run: r must be >= 0");
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) throw std::invalid_argument("sample_run: sigma2 must be >= 0");

  const GainPair gains = options.gains.value_or(optimal_gains(spec.id, r));
  RunContext ctx;
  ctx.source = to_array(build_ttpc(r).seed_to_output.matrix);
  ctx.network = to_array(network_op(spec).matrix);
  ctx.receiver = spec.receiver;
  ctx.signal_x = x_index(spec.signal_mode);
  ctx.signal_y = y_index(spec.signal_mode);
  ctx.signal_sd = std::sqrt(2.0 * sigma2);

  std::uint64_t setup_sent = 0;
  std::uint64_t setup_consumed = 0;
  {
    // Controllers announce the gain the receiver must apply to their reports.
    MessageBus setup(options.trace);
    const std::array<const PhotocurrentSpec*, 2> specs{&spec.plus, &spec.minus};
    const std::array<double, 2> gain{gains.g_x, gains.g_y};
    for (std::size_t q = 0; q < 2; ++q) {
      Current& c = ctx.currents[q];
      for (const DetectedTerm& term : specs[q]->terms) c.detected[quad_of(term.mode, term.quadrature)] += term.weight;
      if (const auto& ff = specs[q]->feedforward) {
        c.has_feedforward = true;
        c.controller = ff->controller;
        c.controller_quad = quad_of(held_mode(ff->controller), ff->quadrature);
        c.sign = ff->sign;
        setup.send({ff->controller, spec.receiver, MessageKind::GainInstruction, gain[q], 0});
      }
    }
    for (Current& c : ctx.currents)
      if (c.has_feedforward)
        c.gain = setup.receive(spec.receiver, c.controller, MessageKind::GainInstruction, 0).value;
    setup_sent = setup.sent();
    setup_consumed = setup.consumed();
  }

  const std::size_t threads = options.trace ? 1 : std::max<std::size_t>(1, options.threads);
  NormalStream rng(options.seed);
  Moments total;
  std::uint64_t sent = setup_sent;
  std::uint64_t consumed = setup_consumed;
  std::size_t done = 0;
  while (done < options.n_samples) {
    // Draws are made serially in sample order; chunks are then independent.
    std::vector<std::vector<double>> block;
    std::vector<std::size_t> firsts;
    while (block.size() < threads && done < options.n_samples) {
      const std::size_t count = std::min(kChunkSamples, options.n_samples - done);
      std::vector<double> draws(count * kDrawsPerSample);
      for (double& d : draws) d = rng.next();
      block.push_back(std::move(draws));
      firsts.push_back(done);
      done += count;
    }
    std::vector<ChunkResult> results(block.size());
    if (block.size() == 1) {
      results[0] = run_chunk(ctx, block[0], firsts[0], options.trace);
    } else {
      std::vector<std::jthread> workers;
      for (std::size_t c = 1; c < block.size(); ++c)
        workers.emplace_back([&, c] { results[c] = run_chunk(ctx, block[c], firsts[c], nullptr); });
      results[0] = run_chunk(ctx, block[0], firsts[0], nullptr);
    }
    for (const ChunkResult& res : results) {
      total.merge(res.moments);
      sent += res.sent;
      consumed += res.consumed;
    }
  }
  if (sent != consumed) throw std::logic_error("MessageBus: ledger mismatch");

  McEstimate est;
  est.id = spec.id;
  est.r = r;
  est.sigma2 = sigma2;
  est.gains = gains;
  est.n_samples = options.n_samples;
  est.seed = options.seed;
  est.messages_sent = sent;
  est.messages_consumed = consumed;

  const double n = total.n;
  est.total_plus_hat = total.m2[0][0] / (n - 1.0);
  est.total_minus_hat = total.m2[1][1] / (n - 1.0);
  auto regress = [&](std::size_t current, std::size_t signal, double& weight, double& noise) {
    const double sxx = total.m2[signal][signal];
    if (sigma2 > 0.0 && sxx > 0.0 && n > 2.0) {
      weight = total.m2[current][signal] / sxx;
      noise = (total.m2[current][current] - weight * total.m2[current][signal]) / (n - 2.0);
    } else {
      weight = 0.0;
      noise = total.m2[current][current] / (n - 1.0);
    }
  };
  regress(0, 2, est.signal_weight_plus_hat, est.noise_plus_hat);
  regress(1, 3, est.signal_weight_minus_hat, est.noise_minus_hat);
  const double v = 2.0 * sigma2;
  est.snr_x_hat = est.noise_plus_hat > 0.0 ? est.signal_weight_plus_hat * est.signal_weight_plus_hat * v / est.noise_plus_hat : 0.0;
  est.snr_y_hat = est.noise_minus_hat > 0.0 ? est.signal_weight_minus_hat * est.signal_weight_minus_hat * v / est.noise_minus_hat : 0.0;
  est.stderr_noise_plus = est.noise_plus_hat * std::sqrt(2.0 / (n - 1.0));
  est.stderr_noise_minus = est.noise_minus_hat * std::sqrt(2.0 / (n - 1.0));
  est.stderr_snr_x = snr_stderr(est.snr_x_hat, n);
  est.stderr_snr_y = snr_stderr(est.snr_y_hat, n);
  return est;
}

std::string to_json(const McEstimate& e) {
  nlohmann::json j{{"generator", kGeneratorFamily},
                   {"seed", e.seed},
                   {"protocol", to_string(e.id)},
                   {"r", e.r},
                   {"sigma2", e.sigma2},
                   {"gains", {{"g_x", e.gains.g_x}, {"g_y", e.gains.g_y}}},
                   {"n_samples", e.n_samples},
                   {"noise_plus_hat", e.noise_plus_hat},
                   {"noise_minus_hat", e.noise_minus_hat},
                   {"total_plus_hat", e.total_plus_hat},
                   {"total_minus_hat", e.total_minus_hat},
                   {"signal_weight_plus_hat", e.signal_weight_plus_hat},
                   {"signal_weight_minus_hat", e.signal_weight_minus_hat},
                   {"snr_x_hat", e.snr_x_hat},
                   {"snr_y_hat", e.snr_y_hat},
                   {"stderr_noise_plus", e.stderr_noise_plus},
                   {"stderr_noise_minus", e.stderr_noise_minus},
                   {"stderr_snr_x", e.stderr_snr_x},
                   {"stderr_snr_y", e.stderr_snr_y},
                   {"messages_sent", e.messages_sent},
                   {"messages_consumed", e.messages_consumed}};
  return j.dump(2);
}

McComparison compare_mc_analytic(const ProtocolSpec& spec, double r, double sigma2, const McOptions& options) {
  McComparison cmp;
  cmp.estimate = sample_run(spec, r, sigma2, options);
  cmp.analytic = closed_form_spectra(spec.id, r);
  const double n = static_cast<double>(cmp.estimate.n_samples);
  cmp.low_power = cmp.estimate.n_samples < kMcLowPowerSamples;

  auto check = [&](std::string name, double estimate, double expected, double se) {
    McCheck c{std::move(name), estimate, expected, se, 0.0, false};
    c.z = se > 0.0 ? (estimate - expected) / se : (estimate == expected ? 0.0 : std::numeric_limits<double>::infinity());
    c.pass = std::abs(c.z) <= kMcSigmaThreshold;
    cmp.checks.push_back(std::move(c));
  };
  const double var_factor = std::sqrt(2.0 / (n - 1.0));
  check("noise_plus", cmp.estimate.noise_plus_hat, cmp.analytic.noise_plus, cmp.analytic.noise_plus * var_factor);
  check("noise_minus", cmp.estimate.noise_minus_hat, cmp.analytic.noise_minus, cmp.analytic.noise_minus * var_factor);
  if (sigma2 > 0.0) {
    const SnrPair snr = snr_from_spectrum(cmp.analytic, sigma2);
    check("snr_x", cmp.estimate.snr_x_hat, snr.x, snr_stderr(snr.x, n));
    check("snr_y", cmp.estimate.snr_y_hat, snr.y, snr_stderr(snr.y, n));
  }
  cmp.pass = std::all_of(cmp.checks.begin(), cmp.checks.end(), [](const McCheck& c) { return c.pass; });
  return cmp;
}

}  // namespace ttpc
