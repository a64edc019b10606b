#pragma once

// Ground truth for the simulated field: soil and air climate per transect and
// the seasonal radio link between a node and its site gateway. Everything
// here is a pure function of the scenario seed and the query arguments.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "borealis/alp.hpp"
#include "borealis/rng.hpp"
#include "borealis/types.hpp"

namespace borealis::environment {

inline constexpr std::array<char, 6> kTransects{'A', 'B', 'C', 'D', 'E', 'F'};

enum class Errc { UnknownTransect, UnknownPlot, BadDistance };
using Error = CodedError<Errc>;

struct Climate {
  double baseline_mean_c = 5.0;
  double baseline_amplitude_c = 8.0;
  double warmest_day_of_year = 211.0;
  double diurnal_amplitude_c = 1.0;
  double diurnal_peak_hour = 15.0;
  double noise_sigma_c = 0.1;
  // Geothermal warming relative to transect A.
  std::array<double, 6> transect_offsets_c{0.0, 1.0, 3.0, 5.0, 7.0, 10.0};
  double air_mean_c = 4.0;
  double air_amplitude_c = 9.0;
  double air_diurnal_c = 3.0;
  double water_mean_pct = 30.0;
  double water_amplitude_pct = 8.0;

  friend bool operator==(const Climate&, const Climate&) = default;
};

struct SiteLayout {
  std::string id;
  std::vector<std::string> plots;
  Position gateway_position;
  Position node_area_center;
  double max_span_m = 150.0;
  bool foliage_blockage = false;
  double snow_scale = 1.0;
  Climate climate;

  bool has_plot(std::string_view plot) const;
  friend bool operator==(const SiteLayout&, const SiteLayout&) = default;
};

/// Index of a transect label in A..F; throws Error{UnknownTransect}.
std::size_t transect_index(char transect);

struct LinkModelParams {
  double tx_power_dbm = 14.0;
  double reference_loss_db = 40.0;  // at 1 m
  double path_loss_exponent = 3.0;
  // Solved so that the mean RSSI at 2 km in clear conditions sits exactly on
  // the floor: 14 - 40 - 30 log10(2000).
  double rssi_floor_dbm = -125.0309;
  double noise_sigma_db = 8.0;
  double foliage_peak_db = 20.0;
  double snow_peak_db = 20.0;

  friend bool operator==(const LinkModelParams&, const LinkModelParams&) = default;
};

struct SeasonState {
  int day_of_year = 1;
  double foliage_factor = 0.0;
  double snow_factor = 0.0;
};

/// Continuous day of year in [1, 366) for a unix timestamp.
double annual_day(std::int64_t unix_seconds);
SeasonState season_for_day(double day_of_year);
SeasonState season_at(std::int64_t unix_seconds);

double soil_temperature(const SiteLayout& site, std::string_view plot, char transect, std::int64_t unix_seconds,
                        std::uint64_t seed);

/// Reading for any sensor kind. Soil kinds need a valid plot/transect; the
/// others are site-wide and ignore them.
double sensor_reading(const SiteLayout& site, alp::SensorKind kind, std::string_view plot, char transect,
                      std::int64_t unix_seconds, std::uint64_t seed);

struct LinkBudget {
  double rssi_mean_dbm = 0.0;
  double sigma_db = 0.0;
  double floor_dbm = 0.0;
  double probability = 0.0;
};

double standard_normal_cdf(double x);

LinkBudget link_budget(double distance_m, const SeasonState& season, const LinkModelParams& params,
                       const SiteLayout& site, double extra_attenuation_db = 0.0);

double delivery_probability(double distance_m, const SeasonState& season, const LinkModelParams& params,
                            const SiteLayout& site);

struct Delivery {
  bool delivered = false;
  double rssi_dbm = 0.0;
};

/// Bernoulli(p) draw plus an RSSI consistent with it: the RSSI lands above the
/// floor exactly when the packet is delivered.
Delivery draw_delivery(Rng& rng, const LinkBudget& link);
bool draw_delivery(Rng& rng, double p);

}  // namespace borealis::environment
