#pragma once

#include <array>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "semmask/codec.hpp"
#include "semmask/error.hpp"

namespace semmask {

namespace units {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

}  // namespace units

struct LinkParams {
  double tx_power_w = 0.1;
  double alpha0_db = -60.0;
  double bandwidth_hz = 1e6;
  double noise_dbm_per_hz = -174.0;
  double station_height_m = 20.0;
  double uav_height_m = 100.0;
  std::array<double, 2> station_xy{-2500.0, 0.0};
  std::array<double, 2> uav_xy{0.0, 1000.0};
};

inline double link_distance_sq(const LinkParams& p) {
  const double dh = p.station_height_m - p.uav_height_m;
  const double dx = p.station_xy[0] - p.uav_xy[0];
  const double dy = p.station_xy[1] - p.uav_xy[1];
  return dh * dh + dx * dx + dy * dy;
}

inline void validate(const LinkParams& p) {
  require(p.tx_power_w > 0 && p.bandwidth_hz > 0, Errc::invalid_argument, "link: power and bandwidth must be positive");
  require(link_distance_sq(p) > 0, Errc::invalid_argument, "link: zero distance between UAV and station");
}

// Received SNR over a free-space LoS link.
inline double snr(const LinkParams& p) {
  validate(p);
  const double ref = p.tx_power_w * units::db_to_linear(p.alpha0_db) /
                     (p.bandwidth_hz * units::dbm_to_watts(p.noise_dbm_per_hz));
  return ref / link_distance_sq(p);
}

// bits/s
inline double achievable_rate(const LinkParams& p) { return p.bandwidth_hz * std::log2(1.0 + snr(p)); }

// seconds
inline double transmission_latency(const Payload& s, const LinkParams& p) {
  const double r = achievable_rate(p);
  require(r > 0, Errc::invalid_argument, "link: zero achievable rate");
  return double(s.size_bits) / r;
}

inline const std::vector<double>& default_elevations() {
  static const std::vector<double> h{100.0, 150.0, 200.0, 250.0};
  return h;
}

struct LatencyRow {
  std::string method;
  double size_bits = 0.0;
  std::vector<double> latency_ms;  // one per elevation
};

struct LatencyTable {
  std::vector<double> elevations;
  std::vector<LatencyRow> rows;
};

inline LatencyTable latency_table(const std::vector<Payload>& payloads, const std::vector<double>& elevations,
                                  LinkParams params) {
  require(!payloads.empty() && !elevations.empty(), Errc::invalid_argument, "latency_table: empty input");
  LatencyTable t{elevations, {}};
  for (const auto& s : payloads) {
    LatencyRow row{s.description, double(s.size_bits), {}};
    for (double h : elevations) {
      params.uav_height_m = h;
      row.latency_ms.push_back(1e3 * transmission_latency(s, params));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

// Rows may carry a mean size that is not an integer number of bits.
inline LatencyTable latency_table_mean(const std::vector<std::pair<std::string, double>>& sizes,
                                       const std::vector<double>& elevations, LinkParams params) {
  require(!sizes.empty() && !elevations.empty(), Errc::invalid_argument, "latency_table: empty input");
  LatencyTable t{elevations, {}};
  for (const auto& [name, bits] : sizes) {
    require(bits >= 0, Errc::invalid_argument, "latency_table: negative size");
    LatencyRow row{name, bits, {}};
    for (double h : elevations) {
      params.uav_height_m = h;
      row.latency_ms.push_back(1e3 * bits / achievable_rate(params));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline void write_latency_csv(std::ostream& os, const LatencyTable& t) {
  os << "method,avg_size_bits";
  for (double h : t.elevations) os << ",latency_ms_h" << h;
  os << "\n";
  for (const auto& r : t.rows) {
    os << r.method << "," << std::fixed << std::setprecision(1) << r.size_bits;
    os << std::setprecision(3);
    for (double v : r.latency_ms) os << "," << v;
    os << "\n";
    os.unsetf(std::ios::floatfield);
  }
}

}  // namespace semmask
