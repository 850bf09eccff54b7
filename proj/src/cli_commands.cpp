#include "ttpc/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "ttpc/capacity.hpp"
#include "ttpc/format.hpp"
#include "ttpc/netsim.hpp"
#include "ttpc/protocols.hpp"
#include "ttpc/ttpc_source.hpp"

namespace ttpc::cli {

namespace {

constexpr double kCorrelationTolerance = 1e-10;
constexpr double kSpectrumTolerance = 1e-10;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& text) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + t + "'");
  }
  if (used != t.size() || !std::isfinite(v)) throw std::invalid_argument("not a number: '" + t + "'");
  return v;
}

// ---------------------------------------------------------------------------
// Tabular output

using Cell = std::variant<double, std::string, bool>;

struct Column {
  std::string name;
  std::string unit;
};

struct Table {
  std::string command;
  std::vector<Column> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> notes;
};

enum class Format { Csv, Json };

struct OutputOptions {
  std::string format = "csv";
  std::string output;
  bool no_header = false;

  Format parsed() const {
    if (format == "csv") return Format::Csv;
    if (format == "json") return Format::Json;
    throw UsageError("--format must be csv or json");
  }
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string cell_text(const Cell& cell) {
  if (const double* d = std::get_if<double>(&cell)) return format_number(*d);
  if (const bool* b = std::get_if<bool>(&cell)) return *b ? "true" : "false";
  return std::get<std::string>(cell);
}

void write_table(const Table& table, const OutputOptions& opts, std::ostream& out) {
  if (opts.parsed() == Format::Csv) {
    if (!opts.no_header) out << "# ttpcnet " << table.command << " generated " << utc_timestamp() << '\n';
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      const Column& col = table.columns[c];
      out << (c ? "," : "") << col.name;
      if (!col.unit.empty()) out << '[' << col.unit << ']';
    }
    out << '\n';
    for (const auto& row : table.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << cell_text(row[c]);
      out << '\n';
    }
    for (const std::string& note : table.notes) out << "# note: " << note << '\n';
    return;
  }
  nlohmann::ordered_json doc;
  doc["command"] = table.command;
  if (!opts.no_header) doc["generated"] = utc_timestamp();
  nlohmann::ordered_json columns = nlohmann::ordered_json::array();
  for (const Column& col : table.columns) columns.push_back({{"name", col.name}, {"unit", col.unit}});
  doc["columns"] = columns;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj;
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::visit([&](const auto& v) { obj[table.columns[c].name] = v; }, row[c]);
    }
    rows.push_back(obj);
  }
  doc["rows"] = rows;
  doc["notes"] = table.notes;
  out << doc.dump(2) << '\n';
}

/// Writes to --output when given, otherwise to `out`.
void emit(const std::string& text, const OutputOptions& opts, std::ostream& out) {
  if (opts.output.empty()) {
    out << text;
    return;
  }
  std::ofstream file(opts.output, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open output file '" + opts.output + "'");
  file << text;
  if (!file) throw std::runtime_error("failed writing '" + opts.output + "'");
}

void emit_table(const Table& table, const OutputOptions& opts, std::ostream& out) {
  std::ostringstream buf;
  write_table(table, opts, buf);
  emit(buf.str(), opts, out);
}

void add_output_options(CLI::App* cmd, OutputOptions& opts) {
  cmd->add_option("--format", opts.format, "Output format: csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--output", opts.output, "Write to this file instead of stdout");
  cmd->add_flag("--no-header", opts.no_header, "Omit the timestamp header");
}

// ---------------------------------------------------------------------------
// Grids

struct GridOptions {
  std::vector<std::string> values;  // --r / --nbar
  std::optional<std::string> grid;  // --grid

  std::vector<double> resolve(const std::string& default_grid) const {
    std::vector<double> out;
    if (grid) {
      out = parse_grid(*grid);
    } else if (!values.empty()) {
      for (const std::string& v : values) {
        const auto part = parse_grid(v);
        out.insert(out.end(), part.begin(), part.end());
      }
    } else {
      out = parse_grid(default_grid);
    }
    if (out.empty()) throw UsageError("grid is empty");
    for (double v : out)
      if (v < 0.0) throw UsageError("grid values must be >= 0");
    return out;
  }
};

std::vector<ProtocolId> resolve_protocols(const std::vector<std::string>& names) {
  if (names.empty()) return {kAllProtocols.begin(), kAllProtocols.end()};
  std::vector<ProtocolId> ids;
  for (const std::string& n : names) {
    try {
      ids.push_back(protocol_from_string(n));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  return ids;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_verify_correlations(const GridOptions& grid, const OutputOptions& opts, std::ostream& out) {
  const auto rs = grid.resolve("0:3:0.25");
  Table table{"verify-correlations",
              {{"r", ""},
               {"relation", ""},
               {"variance", "SNU"},
               {"expected=4*exp(-2r)", "SNU"},
               {"abs_error", "SNU"},
               {"pass", ""}},
              {},
              {}};
  bool all_pass = true;
  for (double r : rs) {
    const TtpcState source = build_ttpc(r);
    const double expected = correlation_variance_closed_form(r);
    for (RelationId id : kAllRelations) {
      const double v = correlation_variance(source, id);
      const double err = std::abs(v - expected);
      const bool pass = err <= kCorrelationTolerance;
      all_pass = all_pass && pass;
      table.rows.push_back({r, std::string(to_string(id)), v, expected, err, pass});
    }
  }
  table.notes.push_back("tolerance 1e-10");
  emit_table(table, opts, out);
  return all_pass ? kExitOk : kExitFailure;
}

int cmd_spectra(const GridOptions& grid, const std::vector<std::string>& protocols,
                std::optional<double> gain, const OutputOptions& opts, std::ostream& out) {
  const auto rs = grid.resolve("0,0.3,0.5,1,2");
  const auto ids = resolve_protocols(protocols);
  Table table{"spectra",
              {{"r", ""},
               {"squeezing_dB", "dB"},
               {"protocol", ""},
               {"g_x", ""},
               {"g_y", ""},
               {"noise_plus", "SNU"},
               {"noise_minus", "SNU"},
               {"engine_noise_plus", "SNU"},
               {"engine_noise_minus", "SNU"},
               {"signal_gain_plus", ""},
               {"signal_gain_minus", ""},
               {"max_abs_diff", "SNU"}},
              {},
              {}};
  bool all_pass = true;
  for (double r : rs) {
    for (ProtocolId id : ids) {
      const GainPair g = gain ? GainPair{*gain, *gain} : optimal_gains(id, r);
      const SpectrumReport closed = closed_form_spectra(id, r, g);
      const SpectrumReport engine = engine_spectra(protocol_spec(id), r, g);
      const double diff = std::max({std::abs(closed.noise_plus - engine.noise_plus),
                                    std::abs(closed.noise_minus - engine.noise_minus),
                                    std::abs(closed.signal_gain_plus - engine.signal_gain_plus),
                                    std::abs(closed.signal_gain_minus - engine.signal_gain_minus)});
      all_pass = all_pass && diff <= kSpectrumTolerance * std::max(1.0, closed.noise_plus);
      table.rows.push_back({r, squeezing_db(r), std::string(to_string(id)), g.g_x, g.g_y, closed.noise_plus,
                            closed.noise_minus, engine.noise_plus, engine.noise_minus, closed.signal_gain_plus,
                            closed.signal_gain_minus, diff});
    }
  }
  emit_table(table, opts, out);
  return all_pass ? kExitOk : kExitFailure;
}

int cmd_gains(const GridOptions& grid, const OutputOptions& opts, std::ostream& out) {
  const auto rs = grid.resolve("0,0.1,0.5,1,2");
  Table table{"gains",
              {{"r", ""},
               {"s", ""},
               {"g_ab_cd_opt", ""},
               {"g_ac_bd_opt", ""},
               {"ab_cd_noise_opt", "SNU"},
               {"ac_bd_noise_opt", "SNU"}},
              {},
              {}};
  for (double r : rs) {
    const GainPair ab = optimal_gains_ab(r);
    const GainPair ac = optimal_gains_ac(r);
    table.rows.push_back({r, squeezing_degree(r), ab.g_x, ac.g_x, spectra_ab_two_controllers(r, ab).noise_plus,
                          spectra_ac_two_controllers(r, ac).noise_plus});
  }
  emit_table(table, opts, out);
  return kExitOk;
}

int cmd_fig4(const GridOptions& grid, bool db_grid, const OutputOptions& opts, std::ostream& out) {
  auto values = grid.resolve(db_grid ? "0:21:0.5" : "0:2.5:0.05");
  Table table{"fig4",
              {{"squeezing_dB", "dB"},
               {"snl", "SNU"},
               {"ab_unassisted", "SNU"},
               {"ab_two_controllers_opt", "SNU"},
               {"ab_one_controller", "SNU"},
               {"ac_unassisted", "SNU"},
               {"ac_two_controllers_opt", "SNU"},
               {"ac_one_controller", "SNU"}},
              {},
              {}};
  for (double v : values) {
    const double r = db_grid ? r_from_db(v) : v;
    const double db = db_grid ? v : squeezing_db(r);
    table.rows.push_back({db, 1.0, closed_form_spectra(ProtocolId::AB, r).noise_plus,
                          closed_form_spectra(ProtocolId::AB_CD, r).noise_plus,
                          closed_form_spectra(ProtocolId::AB_D, r).noise_plus,
                          closed_form_spectra(ProtocolId::AC, r).noise_plus,
                          closed_form_spectra(ProtocolId::AC_BD, r).noise_plus,
                          closed_form_spectra(ProtocolId::AC_D, r).noise_plus});
  }
  const double s_root = ab_unassisted_snl_crossing();
  table.notes.push_back("ab_unassisted equals the shot-noise limit at s = 3-2*sqrt(2) = " + format_number(s_root) +
                        " (" + format_number(-10.0 * std::log10(s_root)) + " dB)");
  table.notes.push_back("the threshold s < 0.16 (7.96 dB) is an approximation of this root");
  table.notes.push_back("noise_minus equals noise_plus for every protocol at optimal gains");
  emit_table(table, opts, out);
  return kExitOk;
}

int cmd_fig5(const GridOptions& grid, bool bits, const OutputOptions& opts, std::ostream& out) {
  const auto nbars = grid.resolve("0:20:0.1");
  const std::string unit = bits ? "bits" : "nats";
  const double scale = bits ? 1.0 / std::numbers::ln2 : 1.0;
  Table table{"fig5",
              {{"nbar", "photons"},
               {"C_AB", unit},
               {"C_AB_CD", unit},
               {"C_AB_D", unit},
               {"C_AC", unit},
               {"C_AC_BD", unit},
               {"C_AC_D", unit}},
              {},
              {}};
  const std::array<ProtocolId, 6> order{ProtocolId::AB, ProtocolId::AB_CD, ProtocolId::AB_D,
                                        ProtocolId::AC, ProtocolId::AC_BD, ProtocolId::AC_D};
  for (const Fig5Row& row : fig5_sweep(nbars)) {
    std::vector<Cell> cells{row.nbar};
    for (ProtocolId id : order) {
      for (const CapacityReport& rep : row.reports)
        if (rep.id == id) cells.push_back(rep.capacity * scale);
    }
    table.rows.push_back(std::move(cells));
  }
  table.notes.push_back("allocation sigma^2 = sinh(r)cosh(r), nbar = sigma^2 + sinh^2(r)");
  table.notes.push_back("C_AB_CD < C_AB below nbar = 0.1102 and C_AC_D < C_AC below nbar = (sqrt(3)-1)/2 = 0.3660");
  emit_table(table, opts, out);
  return kExitOk;
}

int cmd_capacity(const GridOptions& grid, const std::vector<std::string>& protocols, bool bits,
                 std::optional<double> split, const OutputOptions& opts, std::ostream& out) {
  const auto nbars = grid.resolve("0,0.5,1,2,5,10,20");
  const auto ids = resolve_protocols(protocols);
  if (split && !(*split >= 0.0 && *split <= 1.0)) throw UsageError("--split must lie in [0,1]");
  std::vector<CapacityReport> reports;
  for (double nbar : nbars)
    for (ProtocolId id : ids)
      reports.push_back(split ? capacity_for_budget(id, split_budget(nbar, *split * nbar)) : capacity(id, nbar));
  std::ostringstream buf;
  if (opts.parsed() == Format::Csv) {
    if (!opts.no_header) buf << "# ttpcnet capacity generated " << utc_timestamp() << '\n';
    write_capacity_csv(buf, reports, bits);
  } else {
    auto doc = nlohmann::json::parse(capacity_json(reports, bits));
    doc["command"] = "capacity";
    if (!opts.no_header) doc["generated"] = utc_timestamp();
    buf << doc.dump(2) << '\n';
  }
  emit(buf.str(), opts, out);
  return kExitOk;
}

struct McArgs {
  std::string protocol = "ab_d";
  std::string spec_file;
  double r = 1.0;
  double sigma2 = 0.0;
  double samples = 1e6;
  std::uint64_t seed = 42;
  std::optional<double> gain;
  std::size_t threads = 1;
  std::string trace;
};

int cmd_montecarlo(const McArgs& args, const OutputOptions& opts, std::ostream& out) {
  if (!(args.samples >= 2.0) || args.samples != std::floor(args.samples) || args.samples > 1e12)
    throw UsageError("--samples must be an integer >= 2");
  if (!(args.r >= 0.0)) throw UsageError("--r must be >= 0");
  if (!(args.sigma2 >= 0.0)) throw UsageError("--sigma2 must be >= 0");

  ProtocolSpec spec;
  if (!args.spec_file.empty()) {
    std::ifstream in(args.spec_file);
    if (!in) throw UsageError("cannot read spec file '" + args.spec_file + "'");
    std::stringstream text;
    text << in.rdbuf();
    spec = protocol_from_json(text.str());
  } else {
    try {
      spec = protocol_spec(protocol_from_string(args.protocol));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }

  McOptions options;
  options.n_samples = static_cast<std::size_t>(args.samples);
  options.seed = args.seed;
  options.threads = args.threads;
  if (args.gain) options.gains = GainPair{*args.gain, *args.gain};
  std::ofstream trace_file;
  if (!args.trace.empty()) {
    trace_file.open(args.trace, std::ios::binary);
    if (!trace_file) throw std::runtime_error("cannot open trace file '" + args.trace + "'");
    options.trace = &trace_file;
  }

  const McComparison cmp = compare_mc_analytic(spec, args.r, args.sigma2, options);
  std::ostringstream buf;
  if (opts.parsed() == Format::Json) {
    nlohmann::ordered_json doc;
    doc["command"] = "montecarlo";
    if (!opts.no_header) doc["generated"] = utc_timestamp();
    doc["estimate"] = nlohmann::ordered_json::parse(to_json(cmp.estimate));
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const McCheck& c : cmp.checks)
      checks.push_back({{"quantity", c.quantity},
                        {"estimate", c.estimate},
                        {"expected", c.expected},
                        {"stderr", c.standard_error},
                        {"z", c.z},
                        {"pass", c.pass}});
    doc["checks"] = checks;
    doc["low_power"] = cmp.low_power;
    doc["pass"] = cmp.pass;
    buf << doc.dump(2) << '\n';
  } else {
    if (!opts.no_header) buf << "# ttpcnet montecarlo generated " << utc_timestamp() << '\n';
    const McEstimate& e = cmp.estimate;
    buf << "# generator " << kGeneratorFamily << " seed " << e.seed << '\n';
    buf << "# protocol " << to_string(e.id) << " r " << format_number(e.r) << " sigma2 " << format_number(e.sigma2)
        << " g_x " << format_number(e.gains.g_x) << " g_y " << format_number(e.gains.g_y) << " samples "
        << e.n_samples << '\n';
    buf << "# messages sent " << e.messages_sent << " consumed " << e.messages_consumed << '\n';
    buf << "quantity,estimate,expected,stderr,z[sigma],pass\n";
    for (const McCheck& c : cmp.checks)
      buf << c.quantity << ',' << format_number(c.estimate) << ',' << format_number(c.expected) << ','
          << format_number(c.standard_error) << ',' << format_number(c.z) << ',' << (c.pass ? "true" : "false")
          << '\n';
    if (cmp.low_power) buf << "# note: low-power comparison (fewer than " << kMcLowPowerSamples << " samples)\n";
    buf << "# result " << (cmp.pass ? "PASS" : "FAIL") << '\n';
  }
  emit(buf.str(), opts, out);
  return cmp.pass ? kExitOk : kExitFailure;
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) return {};
  if (t.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(t);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw std::invalid_argument("range grid must be start:stop:step");
    const double start = parse_number(parts[0]);
    const double stop = parse_number(parts[1]);
    const double step = parse_number(parts[2]);
    if (!(step > 0.0) || stop < start) throw std::invalid_argument("range grid needs step > 0 and stop >= start");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.push_back(start + static_cast<double>(k) * step);
    return out;
  }
  std::vector<double> out;
  std::stringstream ss(t);
  for (std::string p; std::getline(ss, p, ',');) out.push_back(parse_number(p));
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dense-coding network simulator on a four-mode three-party-correlated source", "ttpcnet"};
  app.require_subcommand(1);

  OutputOptions opts;
  GridOptions grid;
  std::vector<std::string> protocols;
  bool bits = false;
  bool db_grid = false;
  std::optional<double> gain;
  std::optional<double> split;
  McArgs mc;

  auto add_grid = [&](CLI::App* cmd, const char* values_flag, const char* help) {
    cmd->add_option(values_flag, grid.values, help)->delimiter(',');
    cmd->add_option("--grid", grid.grid, "Range start:stop:step or comma list");
  };

  auto* verify = app.add_subcommand("verify-correlations", "Check the eight three-party correlation variances");
  add_grid(verify, "--r", "Squeezing parameters");
  add_output_options(verify, opts);

  auto* spectra = app.add_subcommand("spectra", "Closed-form and engine noise spectra per protocol");
  add_grid(spectra, "--r", "Squeezing parameters");
  spectra->add_option("--protocol", protocols, "Protocol ids (default: all)")->delimiter(',');
  spectra->add_option("--gain", gain, "Feedforward gain override for both quadratures");
  add_output_options(spectra, opts);

  auto* gains = app.add_subcommand("gains", "Optimal feedforward gains");
  add_grid(gains, "--r", "Squeezing parameters");
  add_output_options(gains, opts);

  auto* fig4 = app.add_subcommand("fig4", "Noise levels versus squeezing");
  add_grid(fig4, "--r", "Squeezing parameters");
  fig4->add_flag("--db", db_grid, "Interpret grid values as squeezing in dB");
  add_output_options(fig4, opts);

  auto* fig5 = app.add_subcommand("fig5", "Channel capacities versus mean photon number");
  add_grid(fig5, "--nbar", "Mean photon numbers");
  fig5->add_flag("--bits", bits, "Report bits instead of nats");
  add_output_options(fig5, opts);

  auto* cap = app.add_subcommand("capacity", "SNR and capacity per protocol");
  add_grid(cap, "--nbar", "Mean photon numbers");
  cap->add_option("--protocol", protocols, "Protocol ids (default: all)")->delimiter(',');
  cap->add_flag("--bits", bits, "Report bits instead of nats");
  cap->add_option("--split", split, "Fraction of nbar spent on squeezing (default: sigma^2 = sinh r cosh r)");
  add_output_options(cap, opts);

  auto* montecarlo = app.add_subcommand("montecarlo", "Monte Carlo check of a protocol against its closed form");
  montecarlo->add_option("--protocol", mc.protocol, "Protocol id");
  montecarlo->add_option("--spec-file", mc.spec_file, "Protocol spec JSON (overrides --protocol)");
  montecarlo->add_option("--r", mc.r, "Squeezing parameter");
  montecarlo->add_option("--sigma2", mc.sigma2, "Signal variance sigma^2 (V_Xs = V_Ys = 2 sigma^2)");
  montecarlo->add_option("--samples", mc.samples, "Number of samples");
  montecarlo->add_option("--seed", mc.seed, "RNG seed");
  montecarlo->add_option("--gain", mc.gain, "Gain the stations actually use (default: optimal)");
  montecarlo->add_option("--threads", mc.threads, "Worker threads")->check(CLI::PositiveNumber);
  montecarlo->add_option("--trace", mc.trace, "Write the classical message stream as NDJSON");
  add_output_options(montecarlo, opts);

  std::vector<std::string> argv_store{"ttpcnet"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*verify) return cmd_verify_correlations(grid, opts, out);
    if (*spectra) return cmd_spectra(grid, protocols, gain, opts, out);
    if (*gains) return cmd_gains(grid, opts, out);
    if (*fig4) return cmd_fig4(grid, db_grid, opts, out);
    if (*fig5) return cmd_fig5(grid, bits, opts, out);
    if (*cap) return cmd_capacity(grid, protocols, bits, split, opts, out);
    if (*montecarlo) return cmd_montecarlo(mc, opts, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace ttpc::cli
