#include "borealis/environment.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace borealis::environment {
namespace {

constexpr double kTropicalYearDays = 365.2425;
constexpr double kFoliagePeakDay = 196.0;  // mid July
constexpr double kSnowPeakDay = 15.0;      // mid January

double annual_angle(double day_of_year, double peak_day) {
  return 2.0 * std::numbers::pi * (day_of_year - peak_day) / kTropicalYearDays;
}

// Smooth one-year bump: 1 at the peak day, 0 half a year away.
double seasonal_bump(double day_of_year, double peak_day) {
  const double c = 0.5 * (1.0 + std::cos(annual_angle(day_of_year, peak_day)));
  return c * c * c * c;
}

double day_fraction_hours(std::int64_t unix_seconds) {
  const std::int64_t s = ((unix_seconds % kSecondsPerDay) + kSecondsPerDay) % kSecondsPerDay;
  return static_cast<double>(s) / 3600.0;
}

std::uint64_t noise_key(std::uint64_t seed, std::string_view site, std::string_view plot, char transect,
                        std::uint64_t channel, std::int64_t unix_seconds) {
  std::uint64_t h = hash_combine(seed, hash_string(site));
  h = hash_combine(h, hash_string(plot));
  h = hash_combine(h, static_cast<std::uint64_t>(transect));
  h = hash_combine(h, channel);
  return hash_combine(h, static_cast<std::uint64_t>(unix_seconds));
}

}  // namespace

bool SiteLayout::has_plot(std::string_view plot) const {
  return std::find(plots.begin(), plots.end(), plot) != plots.end();
}

std::size_t transect_index(char transect) {
  const auto it = std::find(kTransects.begin(), kTransects.end(), transect);
  if (it == kTransects.end())
    throw Error(Errc::UnknownTransect, std::string("unknown transect '") + transect + "'");
  return static_cast<std::size_t>(it - kTransects.begin());
}

double annual_day(std::int64_t unix_seconds) {
  const double days = static_cast<double>(unix_seconds) / static_cast<double>(kSecondsPerDay);
  double d = std::fmod(days, kTropicalYearDays);
  if (d < 0) d += kTropicalYearDays;
  return d + 1.0;
}

SeasonState season_for_day(double day_of_year) {
  SeasonState s;
  s.day_of_year = static_cast<int>(std::floor(day_of_year));
  s.foliage_factor = seasonal_bump(day_of_year, kFoliagePeakDay);
  s.snow_factor = seasonal_bump(day_of_year, kSnowPeakDay);
  return s;
}

SeasonState season_at(std::int64_t unix_seconds) { return season_for_day(annual_day(unix_seconds)); }

double soil_temperature(const SiteLayout& site, std::string_view plot, char transect, std::int64_t unix_seconds,
                        std::uint64_t seed) {
  const std::size_t ti = transect_index(transect);
  if (!site.has_plot(plot))
    throw Error(Errc::UnknownPlot, "site " + site.id + " has no plot " + std::string(plot));
  const Climate& c = site.climate;
  const double doy = annual_day(unix_seconds);
  const double baseline =
      c.baseline_mean_c + c.baseline_amplitude_c * std::cos(annual_angle(doy, c.warmest_day_of_year));
  const double diurnal =
      c.diurnal_amplitude_c * std::cos(2.0 * std::numbers::pi * (day_fraction_hours(unix_seconds) - c.diurnal_peak_hour) / 24.0);
  double noise = 0.0;
  if (c.noise_sigma_c > 0.0)
    noise = c.noise_sigma_c * hashed_normal(noise_key(seed, site.id, plot, transect, 1, unix_seconds));
  return baseline + c.transect_offsets_c[ti] + diurnal + noise;
}

double sensor_reading(const SiteLayout& site, alp::SensorKind kind, std::string_view plot, char transect,
                      std::int64_t unix_seconds, std::uint64_t seed) {
  const Climate& c = site.climate;
  const double doy = annual_day(unix_seconds);
  const double hours = day_fraction_hours(unix_seconds);
  const double diurnal = std::cos(2.0 * std::numbers::pi * (hours - c.diurnal_peak_hour) / 24.0);
  const double seasonal = std::cos(annual_angle(doy, c.warmest_day_of_year));
  auto noise = [&](std::uint64_t channel, double sigma) {
    return sigma > 0.0 ? sigma * hashed_normal(noise_key(seed, site.id, "", '-', channel, unix_seconds)) : 0.0;
  };
  switch (kind) {
    case alp::SensorKind::SoilTemp:
      return soil_temperature(site, plot, transect, unix_seconds, seed);
    case alp::SensorKind::WaterContent:
      // Wettest at snowmelt, driest late summer.
      return c.water_mean_pct - c.water_amplitude_pct * seasonal + noise(2, c.noise_sigma_c);
    case alp::SensorKind::Weather:
      return c.air_mean_c + c.air_amplitude_c * seasonal + c.air_diurnal_c * diurnal + noise(3, 4 * c.noise_sigma_c);
    case alp::SensorKind::AmbientTRH:
      return c.air_mean_c + 2.0 + c.air_amplitude_c * seasonal + c.air_diurnal_c * diurnal +
             noise(4, 4 * c.noise_sigma_c);
  }
  return 0.0;
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

LinkBudget link_budget(double distance_m, const SeasonState& season, const LinkModelParams& params,
                       const SiteLayout& site, double extra_attenuation_db) {
  if (!(distance_m > 0.0)) throw Error(Errc::BadDistance, "distance must be positive");
  const double d = std::max(distance_m, 1.0);
  const double foliage_db = site.foliage_blockage ? params.foliage_peak_db * season.foliage_factor : 0.0;
  const double snow_db = params.snow_peak_db * season.snow_factor * site.snow_scale;
  LinkBudget b;
  b.rssi_mean_dbm = params.tx_power_dbm - params.reference_loss_db -
                    10.0 * params.path_loss_exponent * std::log10(d) - foliage_db - snow_db - extra_attenuation_db;
  b.sigma_db = params.noise_sigma_db;
  b.floor_dbm = params.rssi_floor_dbm;
  const double margin = b.rssi_mean_dbm - b.floor_dbm;
  if (b.sigma_db > 0.0)
    b.probability = standard_normal_cdf(margin / b.sigma_db);
  else
    b.probability = margin >= 0.0 ? 1.0 : 0.0;
  return b;
}

double delivery_probability(double distance_m, const SeasonState& season, const LinkModelParams& params,
                            const SiteLayout& site) {
  return link_budget(distance_m, season, params, site).probability;
}

Delivery draw_delivery(Rng& rng, const LinkBudget& link) {
  const double u = rng.uniform();
  Delivery out;
  out.delivered = u < link.probability;
  if (link.sigma_db > 0.0) {
    // Conditional shadowing deviate: z > Phi^-1(1 - p) iff u < p.
    const double q = std::clamp(1.0 - u, 1e-15, 1.0 - 1e-15);
    const double z = -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * q);
    out.rssi_dbm = link.rssi_mean_dbm + link.sigma_db * z;
  } else {
    out.rssi_dbm = link.rssi_mean_dbm;
  }
  return out;
}

bool draw_delivery(Rng& rng, double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("draw_delivery: probability outside [0, 1]");
  return rng.uniform() < p;
}

}  // namespace borealis::environment
