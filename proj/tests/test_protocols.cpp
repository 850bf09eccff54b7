#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <doctest.h>

#include "oracles.hpp"
#include "ttpc/protocols.hpp"

using namespace ttpc;

namespace {

const double kRt2 = std::numbers::sqrt2;
const double kRt3 = std::numbers::sqrt3;

// Slots of the oracle's output rows.
enum { X1, Y1, X2, Y2, X3, Y3, X4, Y4 };

struct OracleCurrents {
  std::array<double, 8> plus{};
  std::array<double, 8> minus{};
};

/// Photocurrents written directly on the pre-network b quadratures, as the
/// receiver would combine them, independent of ProtocolSpec.
OracleCurrents oracle_currents(ProtocolId id, GainPair g) {
  OracleCurrents c;
  const double h = 1.0 / kRt2;
  switch (id) {
    case ProtocolId::AB:  // (X_b2 + X_b1)/sqrt2, (Y_b2 - Y_b1)/sqrt2
      c.plus[X1] = h; c.plus[X2] = h;
      c.minus[Y2] = h; c.minus[Y1] = -h;
      break;
    case ProtocolId::AC:
      c.plus[X1] = h; c.plus[X3] = h;
      c.minus[Y3] = h; c.minus[Y1] = -h;
      break;
    case ProtocolId::AB_CD:  // (sqrt2 X_b1 + X_b2)/sqrt3 + g_x X_b4, (sqrt2 Y_b2 - Y_b1)/sqrt3 + g_y X_b3
      c.plus[X1] = kRt2 / kRt3; c.plus[X2] = 1 / kRt3; c.plus[X4] = g.g_x;
      c.minus[Y2] = kRt2 / kRt3; c.minus[Y1] = -1 / kRt3; c.minus[X3] = g.g_y;
      break;
    case ProtocolId::AC_BD:  // (X_b1 - Y_b3)/sqrt2 + g_x X_b4, (Y_b1 - X_b3)/sqrt2 - g_y Y_b2
      c.plus[X1] = h; c.plus[Y3] = -h; c.plus[X4] = g.g_x;
      c.minus[Y1] = h; c.minus[X3] = -h; c.minus[Y2] = -g.g_y;
      break;
    case ProtocolId::AB_D:  // [(X_b2 + X_b4)/sqrt2 + X_b1]/sqrt2, [(Y_b2 + Y_b4)/sqrt2 - Y_b1]/sqrt2
      c.plus[X2] = 0.5; c.plus[X4] = 0.5; c.plus[X1] = h;
      c.minus[Y2] = 0.5; c.minus[Y4] = 0.5; c.minus[Y1] = -h;
      break;
    case ProtocolId::AC_D:  // relation VII / 2 and relation V / 2
      c.plus[X1] = 0.5; c.plus[Y3] = -0.5; c.plus[X4] = h;
      c.minus[Y1] = 0.5; c.minus[X3] = 0.5; c.minus[Y4] = -h;
      break;
  }
  return c;
}

double oracle_noise(ProtocolId id, double r, GainPair g, bool plus) {
  const auto c = oracle_currents(id, g);
  return oracle::variance(oracle::ttpc_rows(r), plus ? c.plus : c.minus);
}

/// Receiver's current pulled back to pre-network b quadratures.
Vector pulled_back(ProtocolId id, GainPair g, int which) {
  const ProtocolSpec spec = protocol_spec(id);
  return network_op(spec).matrix.transpose() * measured_forms(spec, g)[static_cast<std::size_t>(which)].coeffs;
}

}  // namespace

TEST_CASE("unassisted AB closed form") {
  CHECK(spectra_ab_unassisted(0.0).noise_plus == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(spectra_ab_unassisted(1.0).noise_plus == doctest::Approx(1.1976181022779968).epsilon(1e-13));
  const double s_root = ab_unassisted_snl_crossing();
  CHECK(spectra_ab_unassisted(-0.5 * std::log(s_root)).noise_plus == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(spectra_ab_unassisted(1.0).signal_gain_plus == 0.5);
  CHECK_THROWS_AS(spectra_ab_unassisted(-1.0), std::invalid_argument);
}

TEST_CASE("unassisted AC closed form never drops below the SNL") {
  CHECK(spectra_ac_unassisted(0.0).noise_plus == 1.0);
  CHECK(spectra_ac_unassisted(1.0).noise_plus == doctest::Approx(3.7621956910836314).epsilon(1e-13));
  for (int k = 0; k <= 100; ++k) CHECK(spectra_ac_unassisted(0.03 * k).noise_minus >= 1.0);
}

TEST_CASE("two-controller AB closed form") {
  const double g = 1.0 / kRt3;
  for (double r : {0.0, 0.5, 1.7}) {
    const SpectrumReport rep = spectra_ab_two_controllers(r, {g, g});
    CHECK(rep.noise_plus == doctest::Approx(4.0 / 3.0 * std::exp(-2.0 * r)).epsilon(1e-13));
    CHECK(rep.noise_minus == doctest::Approx(4.0 / 3.0 * std::exp(-2.0 * r)).epsilon(1e-13));
  }
  CHECK(spectra_ab_two_controllers(0.0, {0.0, 0.0}).noise_plus == doctest::Approx(1.0).epsilon(1e-15));
  const double r01 = -0.5 * std::log(0.1);
  const SpectrumReport opt = spectra_ab_two_controllers(r01, optimal_gains_ab(r01));
  CHECK(opt.noise_plus == doctest::Approx(0.13267326732673265).epsilon(1e-12));
  CHECK(opt.noise_minus == doctest::Approx(0.13267326732673265).epsilon(1e-12));
  CHECK(opt.signal_gain_plus == doctest::Approx(2.0 / 3.0));
  CHECK(opt.signal_gain_minus == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("optimal gains") {
  CHECK(optimal_gains_ab(0.0).g_x == 0.0);
  CHECK(optimal_gains_ab(10.0).g_y == doctest::Approx(1.0 / kRt3).epsilon(1e-15));
  const double r01 = -0.5 * std::log(0.1);
  CHECK(optimal_gains_ab(r01).g_x == doctest::Approx(0.5659175905918115).epsilon(1e-13));
  CHECK(optimal_gains_ac(r01).g_x == doctest::Approx(0.9801980198019803).epsilon(1e-13));
  CHECK(optimal_gains(ProtocolId::AB_D, 1.0).g_x == 0.0);

  for (double r : {0.1, 0.5, 1.0, 2.0}) {
    auto ab_plus = [r](double g) { return spectra_ab_two_controllers(r, {g, 0}).noise_plus; };
    auto ab_minus = [r](double g) { return spectra_ab_two_controllers(r, {0, g}).noise_minus; };
    auto ac_plus = [r](double g) { return spectra_ac_two_controllers(r, {g, 0}).noise_plus; };
    CHECK(std::abs(oracle::argmin(ab_plus, -2, 2) - optimal_gains_ab(r).g_x) < 1e-8);
    CHECK(std::abs(oracle::argmin(ab_minus, -2, 2) - optimal_gains_ab(r).g_y) < 1e-8);
    CHECK(std::abs(oracle::argmin(ac_plus, -2, 2) - optimal_gains_ac(r).g_x) < 1e-8);
    // The same minimizers on the engine route.
    auto engine_ac = [r](double g) { return engine_spectra(protocol_spec(ProtocolId::AC_BD), r, {0, g}).noise_minus; };
    CHECK(std::abs(oracle::argmin(engine_ac, -2, 2) - optimal_gains_ac(r).g_y) < 1e-7);
  }
}

TEST_CASE("two-controller AC closed form") {
  CHECK(spectra_ac_two_controllers(0.0, optimal_gains_ac(0.0)).noise_plus == doctest::Approx(1.0).epsilon(1e-15));
  const double r01 = -0.5 * std::log(0.1);
  CHECK(closed_form_spectra(ProtocolId::AC_BD, r01).noise_plus == doctest::Approx(0.19801980198019803).epsilon(1e-12));
  for (double r : {0.2, 1.0, 2.5}) {
    const double s = std::exp(-2.0 * r);
    CHECK(closed_form_spectra(ProtocolId::AC_BD, r).noise_minus == doctest::Approx(2.0 * s / (s * s + 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("one-controller closed forms") {
  CHECK(spectra_ab_one_controller(0.0).noise_plus == 1.0);
  CHECK(spectra_ab_one_controller(1.0).noise_plus == doctest::Approx(0.1353352832366127).epsilon(1e-14));
  CHECK(spectra_ab_one_controller(1.0).signal_gain_plus == 0.5);
  CHECK(spectra_ac_one_controller(0.0).noise_minus == 1.0);
  CHECK(spectra_ac_one_controller(1.0).noise_minus == doctest::Approx(0.1353352832366127).epsilon(1e-14));
  CHECK(spectra_ac_one_controller(1.0).signal_gain_plus == 0.25);
}

TEST_CASE("engine agrees with the closed forms and the hand-written oracle") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> gain(-1.5, 1.5);
  for (double r : {0.0, 0.3, 0.5, 1.0, 2.0, 2.7}) {
    for (ProtocolId id : kAllProtocols) {
      for (int trial = 0; trial < 3; ++trial) {
        const GainPair g = trial == 0 ? optimal_gains(id, r) : GainPair{gain(gen), gain(gen)};
        const SpectrumReport closed = closed_form_spectra(id, r, g);
        const SpectrumReport engine = engine_spectra(protocol_spec(id), r, g);
        INFO("protocol ", to_string(id), " r ", r);
        const double scale = std::max(1.0, closed.noise_plus);
        CHECK(std::abs(engine.noise_plus - closed.noise_plus) < 1e-10 * scale);
        CHECK(std::abs(engine.noise_minus - closed.noise_minus) < 1e-10 * scale);
        CHECK(std::abs(engine.noise_plus - oracle_noise(id, r, g, true)) < 1e-10 * scale);
        CHECK(std::abs(engine.noise_minus - oracle_noise(id, r, g, false)) < 1e-10 * scale);
        CHECK(engine.signal_gain_plus == doctest::Approx(closed.signal_gain_plus).epsilon(1e-14));
        CHECK(engine.signal_gain_minus == doctest::Approx(closed.signal_gain_minus).epsilon(1e-14));
        CHECK(signal_crosstalk(protocol_spec(id), g) < 1e-30);
      }
    }
  }
}

TEST_CASE("detected currents match the hand-written photocurrents") {
  for (ProtocolId id : kAllProtocols) {
    const GainPair g{0.37, -0.81};
    const OracleCurrents expect = oracle_currents(id, g);
    const Vector plus = pulled_back(id, g, 0);
    const Vector minus = pulled_back(id, g, 1);
    for (int k = 0; k < 8; ++k) {
      INFO("protocol ", to_string(id), " quadrature ", k);
      CHECK(std::abs(plus(k) - expect.plus[static_cast<std::size_t>(k)]) < 1e-15);
      CHECK(std::abs(minus(k) - expect.minus[static_cast<std::size_t>(k)]) < 1e-15);
    }
  }
}

TEST_CASE("two-controller AB current in seed coordinates") {
  // (1/sqrt6)[(2c - s - sqrt3 g s) X01 + (c - 2s + sqrt3 g c) X02
  //           + (sqrt3 g - 1) c Y03 + (sqrt3 g - 1) s Y04]
  const double r = 0.9, g = 0.42;
  const double c = std::cosh(r), s = std::sinh(r), k = 1.0 / std::sqrt(6.0);
  const TtpcState src = build_ttpc(r);
  const ProtocolSpec spec = protocol_spec(ProtocolId::AB_CD);
  const Vector seed =
      src.seed_to_output.matrix.transpose() * (network_op(spec).matrix.transpose() * measured_forms(spec, {g, 0}).at(0).coeffs);
  CHECK(seed(0) == doctest::Approx(k * (2 * c - s - kRt3 * g * s)).epsilon(1e-13));
  CHECK(seed(2) == doctest::Approx(k * (c - 2 * s + kRt3 * g * c)).epsilon(1e-13));
  CHECK(seed(5) == doctest::Approx(k * (kRt3 * g - 1) * c).epsilon(1e-13));
  CHECK(seed(7) == doctest::Approx(k * (kRt3 * g - 1) * s).epsilon(1e-13));
  CHECK(std::abs(seed(1)) + std::abs(seed(3)) + std::abs(seed(4)) + std::abs(seed(6)) < 1e-14);

  // One controller: (X01 + X02) e^{-r} / sqrt2.
  const ProtocolSpec one = protocol_spec(ProtocolId::AB_D);
  const Vector seed_d =
      src.seed_to_output.matrix.transpose() * (network_op(one).matrix.transpose() * measured_forms(one, {}).at(0).coeffs);
  CHECK(seed_d(0) == doctest::Approx(std::exp(-r) / kRt2).epsilon(1e-13));
  CHECK(seed_d(2) == doctest::Approx(std::exp(-r) / kRt2).epsilon(1e-13));
  CHECK(seed_d.norm() == doctest::Approx(std::exp(-r)).epsilon(1e-13));
}

TEST_CASE("protocol-level properties") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> rdist(1e-3, 3.0);
  SUBCASE("SNL anchor at r = 0") {
    for (ProtocolId id : kAllProtocols) {
      CHECK(closed_form_spectra(id, 0.0).noise_plus == doctest::Approx(1.0).epsilon(1e-15));
      CHECK(closed_form_spectra(id, 0.0).noise_minus == doctest::Approx(1.0).epsilon(1e-15));
    }
  }
  SUBCASE("assisted protocols are below the SNL and decreasing") {
    for (ProtocolId id : kAllProtocols) {
      if (!is_assisted(id)) continue;
      double previous = closed_form_spectra(id, 0.0).noise_plus;
      for (int k = 1; k <= 300; ++k) {
        const double r = 0.01 * k;
        const double noise = closed_form_spectra(id, r).noise_plus;
        CHECK(noise < 1.0);
        CHECK(noise < previous);
        previous = noise;
      }
      for (int trial = 0; trial < 200; ++trial) CHECK(closed_form_spectra(id, rdist(gen)).noise_minus < 1.0);
    }
  }
  SUBCASE("amplitude and phase noise agree at optimal gains") {
    for (int trial = 0; trial < 200; ++trial) {
      const double r = rdist(gen);
      for (ProtocolId id : kAllProtocols) {
        const SpectrumReport rep = engine_spectra(protocol_spec(id), r, optimal_gains(id, r));
        CHECK(std::abs(rep.noise_plus - rep.noise_minus) < 1e-10 * std::max(1.0, rep.noise_plus));
      }
    }
  }
  SUBCASE("assisted AB curves against the unassisted curve") {
    // One controller wins for every r > 0. Two controllers only win above
    // r ~ 0.061: near r = 0 the unassisted slope is steeper.
    for (int trial = 0; trial < 200; ++trial) {
      const double r = rdist(gen);
      const double unassisted = closed_form_spectra(ProtocolId::AB, r).noise_plus;
      CHECK(closed_form_spectra(ProtocolId::AB_D, r).noise_plus < unassisted);
      if (r > 0.061) CHECK(closed_form_spectra(ProtocolId::AB_CD, r).noise_plus < unassisted);
    }
    auto gap = [](double r) {
      return closed_form_spectra(ProtocolId::AB_CD, r).noise_plus - closed_form_spectra(ProtocolId::AB, r).noise_plus;
    };
    CHECK(gap(0.03) > 0.0);
    CHECK(std::abs(oracle::bisect(gap, 0.01, 1.0) - 0.060960439446215986) < 1e-9);
  }
}

TEST_CASE("SNL crossing of unassisted AB") {
  auto excess = [](double s) { return spectra_ab_unassisted(-0.5 * std::log(s)).noise_plus - 1.0; };
  const double root = oracle::bisect(excess, 0.05, 0.5);
  CHECK(std::abs(root - ab_unassisted_snl_crossing()) < 1e-10);
  CHECK(squeezing_db(-0.5 * std::log(root)) == doctest::Approx(7.655513706757267).epsilon(1e-9));
  CHECK(r_from_db(squeezing_db(0.77)) == doctest::Approx(0.77));
}

TEST_CASE("spec validation") {
  ProtocolSpec spec = protocol_spec(ProtocolId::AB_CD);
  CHECK_NOTHROW(validate(spec));

  ProtocolSpec same = spec;
  same.receiver = Station::Alice;
  CHECK_THROWS_AS(validate(same), std::invalid_argument);

  ProtocolSpec overlap = spec;
  overlap.controllers.push_back(Station::Bob);
  CHECK_THROWS_AS(validate(overlap), std::invalid_argument);

  ProtocolSpec bad_mode = spec;
  bad_mode.optical_steps[0].mode_j = 7;
  CHECK_THROWS_AS(validate(bad_mode), std::invalid_argument);
  CHECK_THROWS_AS(engine_spectra(bad_mode, 1.0, {}), std::invalid_argument);

  ProtocolSpec bad_ratio = spec;
  bad_ratio.optical_steps[0].t = 1.0;
  CHECK_THROWS_AS(validate(bad_ratio), std::invalid_argument);

  ProtocolSpec stranger = spec;
  stranger.controllers = {Station::Claire};
  CHECK_THROWS_AS(validate(stranger), std::invalid_argument);  // Daisy feeds forward but is not listed

  ProtocolSpec routed = spec;
  routed.optical_steps.push_back({0.5, 0.0, kModeB2, kModeB4});
  CHECK_THROWS_AS(validate(routed), std::invalid_argument);

  CHECK_THROWS_AS(protocol_from_string("xy"), std::invalid_argument);
  CHECK(protocol_from_string("AB_CD") == ProtocolId::AB_CD);
}

TEST_CASE("protocol JSON round trip") {
  for (ProtocolId id : kAllProtocols) {
    const ProtocolSpec spec = protocol_spec(id);
    const ProtocolSpec back = protocol_from_json(protocol_to_json(spec));
    CHECK(back.id == spec.id);
    CHECK(back.receiver == spec.receiver);
    CHECK(back.controllers == spec.controllers);
    CHECK(back.optical_steps.size() == spec.optical_steps.size());
    CHECK(protocol_to_json(back) == protocol_to_json(spec));
    const SpectrumReport a = engine_spectra(spec, 0.8, optimal_gains(id, 0.8));
    const SpectrumReport b = engine_spectra(back, 0.8, optimal_gains(id, 0.8));
    CHECK(a.noise_plus == b.noise_plus);
    CHECK(a.noise_minus == b.noise_minus);
  }
  CHECK_THROWS_AS(protocol_from_json("{"), std::invalid_argument);
  CHECK_THROWS_AS(protocol_from_json(R"({"id":"ab"})"), std::invalid_argument);
}
