#include <cmath>

#include "borealis/environment.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace borealis;
using namespace borealis::environment;

namespace {

constexpr std::int64_t kEpoch2022 = 1640995200;  // 2022-01-01T00:00:00Z

SiteLayout quiet_site(bool foliage = false) {
  SiteLayout s;
  s.id = "GN13";
  s.plots = {"GN1", "GN2", "GN3"};
  s.foliage_blockage = foliage;
  s.climate.noise_sigma_c = 0.0;
  return s;
}

double mean_probability(double distance, const SiteLayout& site, int first_day, int last_day) {
  const LinkModelParams params;
  double sum = 0.0;
  for (int d = first_day; d <= last_day; ++d) sum += delivery_probability(distance, season_for_day(d + 0.5), params, site);
  return sum / (last_day - first_day + 1);
}

}  // namespace

TEST_CASE("transect offsets are exact without noise") {
  const auto site = quiet_site();
  for (std::int64_t t = kEpoch2022; t < kEpoch2022 + 400 * kSecondsPerDay; t += 7 * 3600 + 13) {
    const double a = soil_temperature(site, "GN2", 'A', t, 1);
    REQUIRE(a - soil_temperature(site, "GN2", 'F', t, 1) == doctest::Approx(-10.0).epsilon(1e-12));
    REQUIRE(soil_temperature(site, "GN2", 'B', t, 1) - a == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(soil_temperature(site, "GN2", 'E', t, 1) - a == doctest::Approx(7.0).epsilon(1e-12));
  }
}

TEST_CASE("annual mean of transect A is the baseline mean") {
  const auto site = quiet_site();
  double sum = 0.0;
  int n = 0;
  for (std::int64_t t = kEpoch2022; t < kEpoch2022 + 365 * kSecondsPerDay; t += 3600, ++n)
    sum += soil_temperature(site, "GN1", 'A', t, 1);
  CHECK(std::abs(sum / n - 5.0) < 0.2);
}

TEST_CASE("environment is a pure function of seed and arguments") {
  auto site = quiet_site();
  site.climate.noise_sigma_c = 0.5;
  const auto t = kEpoch2022 + 12345;
  CHECK(soil_temperature(site, "GN1", 'C', t, 42) == soil_temperature(site, "GN1", 'C', t, 42));
  CHECK(soil_temperature(site, "GN1", 'C', t, 42) != soil_temperature(site, "GN1", 'C', t, 43));
  CHECK(sensor_reading(site, alp::SensorKind::Weather, "", '-', t, 42) ==
        sensor_reading(site, alp::SensorKind::Weather, "", '-', t, 42));
}

TEST_CASE("unknown transect or plot") {
  const auto site = quiet_site();
  CHECK(testutil::error_code<Errc>([&] { soil_temperature(site, "GN1", 'G', 0, 1); }) == Errc::UnknownTransect);
  CHECK(testutil::error_code<Errc>([&] { soil_temperature(site, "GO1", 'A', 0, 1); }) == Errc::UnknownPlot);
  CHECK(transect_index('E') == 4);
}

TEST_CASE("link calibration anchors") {
  const LinkModelParams params;
  const SeasonState clear{};
  const auto site = quiet_site();
  CHECK(delivery_probability(150.0, clear, params, site) >= 0.99);
  // Closed-form inversion: the floor equals the mean RSSI at 2 km.
  CHECK(params.rssi_floor_dbm == doctest::Approx(params.tx_power_dbm - params.reference_loss_db -
                                                 10.0 * params.path_loss_exponent * std::log10(2000.0))
                                     .epsilon(1e-6));
  CHECK(delivery_probability(2000.0, clear, params, site) == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(testutil::error_code<Errc>([&] { delivery_probability(0.0, clear, params, site); }) == Errc::BadDistance);
}

TEST_CASE("delivery probability is monotone") {
  const LinkModelParams params;
  const auto forest = quiet_site(true);
  const auto summer = season_for_day(196.0);
  CHECK(summer.foliage_factor == doctest::Approx(1.0));
  CHECK(season_for_day(15.0).snow_factor == doctest::Approx(1.0));
  CHECK(delivery_probability(300.0, summer, params, forest) < delivery_probability(300.0, SeasonState{}, params, forest));
  double last = 1.0;
  for (double d = 10.0; d < 5000.0; d *= 1.1) {
    const double p = delivery_probability(d, summer, params, forest);
    REQUIRE(p <= last);
    REQUIRE(p >= 0.0);
    last = p;
  }
  CHECK(link_budget(300.0, SeasonState{}, params, forest, 6.0).probability <
        link_budget(300.0, SeasonState{}, params, forest).probability);
}

TEST_CASE("GN13 geometry dips in summer and winter") {
  const auto forest = quiet_site(true);
  for (double distance : {210.0, 250.0, 300.0}) {
    CAPTURE(distance);
    const double may = mean_probability(distance, forest, 121, 151);
    const double summer = mean_probability(distance, forest, 182, 243);
    const double january = mean_probability(distance, forest, 1, 31);
    CHECK(summer < may);
    CHECK(january < may);
  }
}

TEST_CASE("delivery draws") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    REQUIRE(draw_delivery(rng, 1.0));
    REQUIRE_FALSE(draw_delivery(rng, 0.0));
  }
  CHECK_THROWS_AS(draw_delivery(rng, 1.5), std::invalid_argument);

  const double p = 0.37;
  const int n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += draw_delivery(rng, p);
  CHECK(std::abs(hits - n * p) < 3.0 * std::sqrt(n * p * (1 - p)));

  const LinkModelParams params;
  const auto link = link_budget(800.0, SeasonState{}, params, quiet_site());
  for (int i = 0; i < 10000; ++i) {
    const auto d = draw_delivery(rng, link);
    REQUIRE(d.delivered == (d.rssi_dbm > link.floor_dbm));
  }
}

TEST_CASE("standard normal cdf") {
  CHECK(standard_normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(standard_normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-9));
  CHECK(standard_normal_cdf(-3.0) == doctest::Approx(0.0013498980316301).epsilon(1e-9));
}

TEST_CASE("rng substreams are independent of other owners") {
  auto a = Rng::substream(1, 0x1000, "uplink");
  auto b = Rng::substream(1, 0x1000, "uplink");
  auto c = Rng::substream(1, 0x1001, "uplink");
  const auto x = a.next();
  CHECK(x == b.next());
  CHECK(x != c.next());
  Rng r(3);
  for (int i = 0; i < 1000; ++i) REQUIRE(r.below(7) < 7);
}
