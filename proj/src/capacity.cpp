#include "ttpc/capacity.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "ttpc/format.hpp"

namespace ttpc {

namespace {

void require_nbar(double nbar) {
  if (!(nbar >= 0.0) || !std::isfinite(nbar)) throw std::invalid_argument("nbar must be finite and >= 0");
}

}  // namespace

SignalBudget allocate_budget(double nbar) {
  require_nbar(nbar);
  const double r = 0.5 * std::log1p(2.0 * nbar);
  return {nbar, r, std::sinh(r) * std::cosh(r)};
}

SignalBudget split_budget(double nbar, double squeeze_photons) {
  require_nbar(nbar);
  if (!(squeeze_photons >= 0.0) || squeeze_photons > nbar)
    throw std::invalid_argument("split_budget: squeeze photons must lie in [0, nbar]");
  const double r = std::asinh(std::sqrt(squeeze_photons));
  return {nbar, r, nbar - squeeze_photons};
}

SnrPair snr_from_spectrum(const SpectrumReport& report, double sigma2) {
  if (!(sigma2 >= 0.0)) throw std::invalid_argument("snr_from_spectrum: sigma2 must be >= 0");
  if (!(report.noise_plus > 0.0) || !(report.noise_minus > 0.0))
    throw std::invalid_argument("snr_from_spectrum: noise must be positive");
  const double v = 2.0 * sigma2;
  return {report.signal_gain_plus * v / report.noise_plus,
          report.signal_gain_minus * v / report.noise_minus};
}

double mutual_information(double snr_x, double snr_y) {
  if (!(snr_x >= 0.0) || !(snr_y >= 0.0))
    throw std::invalid_argument("mutual_information: SNR must be >= 0");
  return 0.5 * std::log1p(snr_x) + 0.5 * std::log1p(snr_y);
}

CapacityReport capacity_for_budget(ProtocolId id, const SignalBudget& budget) {
  const SpectrumReport spectrum = closed_form_spectra(id, budget.r);
  const SnrPair snr = snr_from_spectrum(spectrum, budget.sigma2);
  return {id, budget.nbar, budget.r, budget.sigma2, snr.x, snr.y, mutual_information(snr.x, snr.y)};
}

CapacityReport capacity(ProtocolId id, double nbar) {
  return capacity_for_budget(id, allocate_budget(nbar));
}

double capacity_closed_form(ProtocolId id, double nbar) {
  require_nbar(nbar);
  const double p = nbar + nbar * nbar;
  const double q = 2.0 * nbar + 1.0;
  const double rt2 = std::numbers::sqrt2;
  switch (id) {
    case ProtocolId::AB: {
      const double a = (rt2 - 1.0) * (rt2 - 1.0) + 1.0;
      const double b = (rt2 + 1.0) * (rt2 + 1.0) + 1.0;
      return std::log1p(8.0 * p / (a * q * q + b));
    }
    case ProtocolId::AB_CD: {
      const double snr_y = p * (q * q + 1.0) / (2.0 * q * q + 1.0);
      return 0.5 * std::log1p(2.0 * snr_y) + 0.5 * std::log1p(snr_y);
    }
    case ProtocolId::AB_D: return std::log1p(p);
    case ProtocolId::AC: return std::log1p(2.0 * p / (q * q + 1.0));
    case ProtocolId::AC_BD: return std::log1p(0.5 * p * (1.0 + 1.0 / (q * q)));
    case ProtocolId::AC_D: return std::log1p(0.5 * p);
  }
  throw std::invalid_argument("capacity_closed_form: unknown protocol");
}

std::vector<Fig5Row> fig5_sweep(std::span<const double> nbar_grid) {
  std::vector<Fig5Row> rows;
  rows.reserve(nbar_grid.size());
  for (double nbar : nbar_grid) {
    Fig5Row row;
    row.nbar = nbar;
    for (std::size_t k = 0; k < kAllProtocols.size(); ++k) row.reports[k] = capacity(kAllProtocols[k], nbar);
    rows.push_back(row);
  }
  return rows;
}

void write_capacity_csv(std::ostream& out, std::span<const CapacityReport> reports, bool bits,
                        bool header) {
  const double scale = bits ? 1.0 / std::numbers::ln2 : 1.0;
  if (header) out << "nbar[photons],protocol,snr_x[ratio],snr_y[ratio]," << (bits ? "capacity_bits[bits]" : "capacity_nats[nats]") << '\n';
  for (const CapacityReport& rep : reports) {
    out << format_number(rep.nbar) << ',' << to_string(rep.id) << ',' << format_number(rep.snr_x) << ','
        << format_number(rep.snr_y) << ',' << format_number(rep.capacity * scale) << '\n';
  }
}

std::string capacity_json(std::span<const CapacityReport> reports, bool bits) {
  const double scale = bits ? 1.0 / std::numbers::ln2 : 1.0;
  nlohmann::json rows = nlohmann::json::array();
  for (const CapacityReport& rep : reports) {
    rows.push_back({{"nbar", rep.nbar},
                    {"protocol", to_string(rep.id)},
                    {"r", rep.r},
                    {"sigma2", rep.sigma2},
                    {"snr_x", rep.snr_x},
                    {"snr_y", rep.snr_y},
                    {bits ? "capacity_bits" : "capacity_nats", rep.capacity * scale}});
  }
  return nlohmann::json{{"unit", bits ? "bits" : "nats"}, {"rows", rows}}.dump(2);
}

}  // namespace ttpc
