#pragma once

// Shannon-Gaussian mutual information and photon-budgeted capacities.
// All information quantities are in nats.

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ttpc/protocols.hpp"

namespace ttpc {

/// Photons per mode shared between signal modulation and squeezing:
/// nbar = sigma2 + sinh^2 r.
struct SignalBudget {
  double nbar = 0.0;
  double r = 0.0;
  double sigma2 = 0.0;
};

/// The fixed allocation sigma2 = sinh r cosh r, i.e. nbar = e^r sinh r and
/// r = ln(2 nbar + 1)/2. Throws for nbar < 0.
SignalBudget allocate_budget(double nbar);

/// Puts `squeeze_photons` = sinh^2 r into squeezing and the rest into the
/// signal. Requires 0 <= squeeze_photons <= nbar.
SignalBudget split_budget(double nbar, double squeeze_photons);

struct SnrPair {
  double x = 0.0;
  double y = 0.0;
};

/// V_Xs = V_Ys = 2 sigma2; snr = signal_gain * 2 sigma2 / noise.
SnrPair snr_from_spectrum(const SpectrumReport& report, double sigma2);

/// 1/2 ln(1 + snr_x) + 1/2 ln(1 + snr_y). Throws on negative input.
double mutual_information(double snr_x, double snr_y);

struct CapacityReport {
  ProtocolId id = ProtocolId::AB;
  double nbar = 0.0;
  double r = 0.0;
  double sigma2 = 0.0;
  double snr_x = 0.0;
  double snr_y = 0.0;
  double capacity = 0.0;  // nats per use
};

/// Budget -> spectrum at optimal gains -> SNR -> mutual information.
CapacityReport capacity(ProtocolId id, double nbar);

/// Same chain for an arbitrary allocation of the budget.
CapacityReport capacity_for_budget(ProtocolId id, const SignalBudget& budget);

/// Capacities written directly in nbar. For AB_CD this is the expression
/// that follows from the spectrum; with q = 2 nbar + 1,
///   SNR_y = (nbar + nbar^2)(q^2 + 1)/(2 q^2 + 1),  SNR_x = 2 SNR_y.
double capacity_closed_form(ProtocolId id, double nbar);

struct Fig5Row {
  double nbar = 0.0;
  std::array<CapacityReport, 6> reports;  // order of kAllProtocols
};

std::vector<Fig5Row> fig5_sweep(std::span<const double> nbar_grid);

/// CSV with columns nbar,protocol,snr_x,snr_y,capacity_nats (or
/// capacity_bits when `bits`).
void write_capacity_csv(std::ostream& out, std::span<const CapacityReport> reports, bool bits,
                        bool header = true);
std::string capacity_json(std::span<const CapacityReport> reports, bool bits);

}  // namespace ttpc
