#include <gtest/gtest.h>

#include <sstream>

#include "semmask/link.hpp"

using namespace semmask;

TEST(Units, Conversions) {
  EXPECT_DOUBLE_EQ(units::db_to_linear(-60), 1e-6);
  EXPECT_NEAR(units::dbm_to_watts(-174), 3.981071705534972e-21, 1e-33);
  EXPECT_NEAR(units::watts_to_dbm(units::dbm_to_watts(-174)), -174, 1e-9);
  EXPECT_NEAR(units::linear_to_db(units::db_to_linear(13.0)), 13.0, 1e-12);
}

TEST(Link, SnrAtHundredMetres) {
  LinkParams p;
  EXPECT_DOUBLE_EQ(link_distance_sq(p), 80.0 * 80 + 2500.0 * 2500 + 1000.0 * 1000);
  const double ref = 0.1 * 1e-6 / (1e6 * std::pow(10.0, -20.4));
  EXPECT_NEAR(ref, 2.5119e7, 1e3);
  EXPECT_NEAR(snr(p), ref / 7.2564e6, 1e-12);
  EXPECT_NEAR(snr(p), 3.4617, 1e-4);
}

TEST(Link, SnrScalesLinearlyWithPower) {
  LinkParams p;
  const double s = snr(p);
  p.tx_power_w *= 2;
  EXPECT_NEAR(snr(p), 2 * s, 1e-12 * s);
}

TEST(Link, UnitDistanceGivesReferenceSnr) {
  LinkParams p;
  p.uav_height_m = p.station_height_m;
  p.uav_xy = {p.station_xy[0] + 1.0, p.station_xy[1]};
  EXPECT_NEAR(snr(p), 0.1 * 1e-6 / (1e6 * units::dbm_to_watts(-174)), 1e-6);
}

TEST(Link, ZeroDistanceIsRejected) {
  LinkParams p;
  p.uav_height_m = p.station_height_m;
  p.uav_xy = p.station_xy;
  EXPECT_THROW(snr(p), Error);
}

TEST(Link, RateContract) {
  LinkParams p;
  EXPECT_NEAR(achievable_rate(p), 1e6 * std::log2(1 + snr(p)), 1e-6);
  EXPECT_NEAR(achievable_rate(p), 2.15756e6, 10.0);
  // Power chosen so that SNR = 1.
  p.tx_power_w /= snr(p);
  EXPECT_NEAR(achievable_rate(p), p.bandwidth_hz, 1e-6);
}

TEST(Link, ZeroPayloadTakesNoTime) {
  EXPECT_EQ(transmission_latency({0, "empty"}, LinkParams{}), 0.0);
}

TEST(Link, LatencyValues) {
  LinkParams p;
  // Frozen from the closed-form model (B log2(1 + SNR)).
  EXPECT_NEAR(1e3 * transmission_latency({14441, ""}, p), 6.6931901, 1e-6);
  EXPECT_NEAR(1e3 * transmission_latency({177780, ""}, p), 82.3984033, 1e-6);
}

TEST(Link, LatencyMonotoneInSizeDistanceAndPower) {
  LinkParams p;
  double prev = 0;
  for (double h : {50.0, 100.0, 150.0, 200.0, 250.0, 400.0}) {
    p.uav_height_m = h;
    const double t = transmission_latency({10000, ""}, p);
    EXPECT_GT(t, prev);
    prev = t;
  }
  p = {};
  EXPECT_LT(transmission_latency({1000, ""}, p), transmission_latency({1001, ""}, p));
  const double base = transmission_latency({1000, ""}, p);
  p.tx_power_w *= 2;
  EXPECT_LT(transmission_latency({1000, ""}, p), base);
  p = {};
  p.alpha0_db += 3;
  EXPECT_LT(transmission_latency({1000, ""}, p), base);
}

TEST(LatencyTable, ShapeAndComposition) {
  LinkParams p;
  const auto t = latency_table({{7004, "a"}, {2119, "b"}}, default_elevations(), p);
  ASSERT_EQ(t.rows.size(), 2u);
  ASSERT_EQ(t.rows[0].latency_ms.size(), 4u);
  p.uav_height_m = 200;
  EXPECT_DOUBLE_EQ(t.rows[1].latency_ms[2], 1e3 * transmission_latency({2119, ""}, p));
  const auto one = latency_table({{1945, "x"}}, {150.0}, LinkParams{});
  p.uav_height_m = 150;
  EXPECT_DOUBLE_EQ(one.rows[0].latency_ms[0], 1e3 * transmission_latency({1945, ""}, p));
  EXPECT_THROW(latency_table({}, {100.0}, p), Error);
}

TEST(LatencyTable, Csv) {
  std::ostringstream os;
  write_latency_csv(os, latency_table({{14441, "semantic_mask"}}, {100.0}, LinkParams{}));
  EXPECT_EQ(os.str(), "method,avg_size_bits,latency_ms_h100\nsemantic_mask,14441.0,6.693\n");
}
