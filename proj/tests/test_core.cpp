#include <gtest/gtest.h>

#include <cmath>

#include "iaqmob/core.hpp"
#include "iaqmob/rng.hpp"
#include "support.hpp"

using namespace iaqmob;
using iaqmob::testing::grid_deployment;

TEST(ZoneOf, CentreOfZoneMapsToThatZone) {
  const auto d = grid_deployment(2, 3);
  EXPECT_EQ(zone_of(d, d.zone(ZoneId{3}).extent.centroid()), ZoneId{3});
}

TEST(ZoneOf, OutsideEveryZoneIsNone) {
  const auto d = grid_deployment(2, 3);
  EXPECT_FALSE(zone_of(d, {-1.0, 2.0}).has_value());
  EXPECT_FALSE(zone_of(d, {7.0, 10.5}).has_value());
}

TEST(ZoneOf, SharedEdgeGoesToLowestIndex) {
  // Zones 2 and 5 are stacked in a 2x3 grid and share the edge y = 5.
  const auto d = grid_deployment(2, 3);
  EXPECT_EQ(zone_of(d, {7.5, 5.0}), ZoneId{2});
  // The corner shared by zones 1, 2, 4 and 5.
  EXPECT_EQ(zone_of(d, {5.0, 5.0}), ZoneId{1});
}

TEST(ZoneOf, InteriorPointsHitExactlyOneZone) {
  const auto d = grid_deployment(3, 4, 2.5);
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const Point p{rng.uniform(0.0, 10.0), rng.uniform(0.0, 7.5)};
    int hits = 0;
    ZoneId hit{};
    for (const auto& z : d.zones) {
      const auto& r = z.extent;
      if (p.x > r.x_min && p.x < r.x_max && p.y > r.y_min && p.y < r.y_max) {
        ++hits;
        hit = z.id;
      }
    }
    if (hits == 1) {
      EXPECT_EQ(zone_of(d, p), hit);
    }
  }
}

TEST(NearestSensor, SingleSensor) {
  auto d = grid_deployment(1, 2);
  d.iaq_sensors = {{"only", {100, 100}, std::nullopt}};
  EXPECT_EQ(nearest_sensor(d, ZoneId{1}), "only");
  EXPECT_EQ(nearest_sensor(d, ZoneId{2}), "only");
}

TEST(NearestSensor, CoLocatedSensorWins) {
  auto d = grid_deployment(1, 2);
  d.iaq_sensors = {{"far", {9.0, 1.0}, std::nullopt}, {"here", {2.5, 2.5}, std::nullopt}};
  EXPECT_EQ(nearest_sensor(d, ZoneId{1}), "here");
}

TEST(NearestSensor, MatchesBruteForceDistances) {
  auto d = grid_deployment(1, 1);
  const Point c = d.zone(ZoneId{1}).extent.centroid();
  d.iaq_sensors = {{"s9", {c.x + 9.0, c.y}, std::nullopt},
                   {"s2", {c.x, c.y - 2.0}, std::nullopt},
                   {"s5", {c.x - 3.0, c.y + 4.0}, std::nullopt}};
  EXPECT_EQ(nearest_sensor(d, ZoneId{1}), "s2");

  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    d.iaq_sensors.clear();
    const int n = 1 + static_cast<int>(rng.below(6));
    for (int i = 0; i < n; ++i) {
      d.iaq_sensors.push_back({"s" + std::to_string(i), {rng.uniform(-20, 20), rng.uniform(-20, 20)}, std::nullopt});
    }
    std::string best;
    double best_d = 1e300;
    for (const auto& s : d.iaq_sensors) {
      const double dist = std::sqrt((s.position.x - c.x) * (s.position.x - c.x) +
                                    (s.position.y - c.y) * (s.position.y - c.y));
      if (dist < best_d || (dist == best_d && s.id < best)) {
        best_d = dist;
        best = s.id;
      }
    }
    EXPECT_EQ(nearest_sensor(d, ZoneId{1}), best);
    EXPECT_EQ(nearest_sensor(d, ZoneId{1}), nearest_sensor(d, ZoneId{1}));
  }
}

TEST(NearestSensor, TiesGoToSmallestId) {
  auto d = grid_deployment(1, 1);
  d.iaq_sensors = {{"b", {2.5, 0.5}, std::nullopt}, {"a", {2.5, 4.5}, std::nullopt}};
  EXPECT_EQ(nearest_sensor(d, ZoneId{1}), "a");
}

TEST(NearestSensor, NoSensorsIsAnError) {
  const auto d = grid_deployment(1, 1);
  EXPECT_THROW(nearest_sensor(d, ZoneId{1}), Error);
}

TEST(SensorForZone, HintOverridesDistance) {
  auto d = grid_deployment(1, 2);
  d.iaq_sensors = {{"near", {2.5, 2.5}, std::nullopt}, {"hinted", {9.0, 2.5}, ZoneId{1}}};
  EXPECT_EQ(sensor_for_zone(d, ZoneId{1}), "hinted");
  EXPECT_EQ(sensor_for_zone(d, ZoneId{2}), "hinted");  // nearest to zone 2's centroid
  EXPECT_EQ(zone_of_sensor(d, d.iaq_sensors[0]), ZoneId{1});
}

TEST(Deployment, ValidationRejectsBadLayouts) {
  auto ok = grid_deployment(1, 2);
  EXPECT_NO_THROW(ok.validate());

  auto no_zones = ok;
  no_zones.zones.clear();
  EXPECT_THROW(no_zones.validate(), Error);

  auto no_gw = ok;
  no_gw.gateways.clear();
  EXPECT_THROW(no_gw.validate(), Error);

  auto dup = ok;
  dup.zones[1].id = ZoneId{1};
  EXPECT_THROW(dup.validate(), Error);

  auto inverted = ok;
  std::swap(inverted.zones[0].extent.x_min, inverted.zones[0].extent.x_max);
  EXPECT_THROW(inverted.validate(), Error);

  auto flat = ok;
  flat.zones[0].extent.y_max = flat.zones[0].extent.y_min;
  EXPECT_THROW(flat.validate(), Error);

  auto gap = ok;
  gap.zones[1].id = ZoneId{3};
  EXPECT_THROW(gap.validate(), Error);

  auto dup_gw = ok;
  dup_gw.gateways[1].id = dup_gw.gateways[0].id;
  EXPECT_THROW(dup_gw.validate(), Error);

  auto dup_sensor = ok;
  dup_sensor.iaq_sensors = {{"s", {0, 0}, std::nullopt}, {"s", {1, 1}, std::nullopt}};
  EXPECT_THROW(dup_sensor.validate(), Error);

  auto bad_hint = ok;
  bad_hint.iaq_sensors = {{"s", {0, 0}, ZoneId{7}}};
  EXPECT_THROW(bad_hint.validate(), Error);
}

TEST(Deployment, JsonRoundTrip) {
  auto d = grid_deployment(2, 2);
  d.name = "office \"A\"";
  d.iaq_sensors = {{"s1", {1.25, 3.1}, ZoneId{2}}, {"s2", {7.0, 8.0}, std::nullopt}};
  const auto back = deployment_from_json(to_json(d));
  EXPECT_EQ(to_json(back), to_json(d));
  EXPECT_EQ(back.iaq_sensors[0].zone_hint, ZoneId{2});
  EXPECT_FALSE(back.iaq_sensors[1].zone_hint.has_value());
}

TEST(Deployment, JsonMissingKeyIsAnError) {
  auto j = to_json(grid_deployment(1, 1));
  j.erase("gateways");
  EXPECT_THROW(deployment_from_json(j), Error);
}

TEST(Time, FloorDivRoundsTowardNegativeInfinity) {
  EXPECT_EQ(floor_div(7, 2), 3);
  EXPECT_EQ(floor_div(-7, 2), -4);
  EXPECT_EQ(floor_div(-8, 2), -4);
  EXPECT_EQ(floor_div(0, 5), 0);
}

TEST(TagSourceNames, RoundTrip) {
  for (auto s : {TagSource::carried, TagSource::stationary, TagSource::occupant}) {
    EXPECT_EQ(parse_tag_source(to_string(s)), s);
  }
  EXPECT_FALSE(parse_tag_source("walking").has_value());
}

TEST(RngTest, SameSeedSameStream) {
  Rng a(99), b(99), c(100);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs |= x != c.next();
  }
  EXPECT_TRUE(differs);
}

TEST(RngTest, BelowStaysInRangeAndCoversIt) {
  Rng r(5);
  std::vector<int> seen(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = r.below(7);
    ASSERT_LT(v, 7u);
    ++seen[v];
  }
  for (int n : seen) EXPECT_GT(n, 800);
}

TEST(RngTest, NormalMoments) {
  Rng r(8);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double v = r.normal();
    s += v;
    s2 += v * v;
  }
  const double mean = s / n;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(s2 / n - mean * mean, 1.0, 0.02);
}

TEST(RngTest, ShuffleIsAPermutation) {
  Rng r(1);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  r.shuffle(std::span<int>(v));
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
  EXPECT_NE(v, sorted);
}
