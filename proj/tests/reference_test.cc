#include "edgempc/reference.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <gtest/gtest.h>

namespace edgempc {
namespace {

TrajectorySpec Circle() {
  TrajectorySpec s;
  s.kind = TrajectoryKind::kCircular;
  s.center = {1.0, -0.5, 0.0};
  s.radius = 2.0;
  s.angular_rate = 2.0 * std::numbers::pi / 40.0;
  s.start_altitude = 2.0;
  s.duration = 80.0;
  return s;
}

TEST(ReferenceTest, CircleStartsOnPositiveX) {
  const TrajectorySpec s = Circle();
  const auto r = SampleReference(s, 0.0).state;
  EXPECT_NEAR(r.position.x(), 3.0, 1e-15);
  EXPECT_NEAR(r.position.y(), -0.5, 1e-15);
  EXPECT_NEAR(r.position.z(), 2.0, 1e-15);
  EXPECT_NEAR(r.velocity.x(), 0.0, 1e-15);
  EXPECT_NEAR(r.velocity.y(), s.radius * s.angular_rate, 1e-15);
  EXPECT_EQ(r.roll, 0.0);
  EXPECT_EQ(r.pitch, 0.0);
}

TEST(ReferenceTest, CircleQuarterPeriod) {
  const TrajectorySpec s = Circle();
  const double t = (std::numbers::pi / 2) / s.angular_rate;
  const auto r = SampleReference(s, t).state;
  EXPECT_NEAR(r.position.x() - s.center.x(), 0.0, 1e-12);
  EXPECT_NEAR(r.position.y() - s.center.y(), s.radius, 1e-12);
  EXPECT_NEAR(r.velocity.x(), -s.radius * s.angular_rate, 1e-12);
  EXPECT_NEAR(r.velocity.y(), 0.0, 1e-12);
}

TEST(ReferenceTest, HelixClimbsLinearly) {
  TrajectorySpec s = Circle();
  s.kind = TrajectoryKind::kHelical;
  s.climb_rate = 0.05;
  const auto r = SampleReference(s, 80.0).state;
  EXPECT_NEAR(r.position.z(), s.start_altitude + 4.0, 1e-12);
  EXPECT_NEAR(r.velocity.z(), 0.05, 1e-15);
}

TEST(ReferenceTest, CircleRadiusHoldsEverywhere) {
  const TrajectorySpec s = Circle();
  for (int i = 0; i <= 8000; ++i) {
    const auto p = SampleReference(s, i * 0.01).state.position;
    const double r = std::hypot(p.x() - s.center.x(), p.y() - s.center.y());
    ASSERT_NEAR(r, s.radius, 1e-12) << "t = " << i * 0.01;
  }
}

TEST(ReferenceTest, HelixSecondDifferencesVanish) {
  TrajectorySpec s = Circle();
  s.kind = TrajectoryKind::kHelical;
  s.climb_rate = 0.05;
  const double h = 0.01;
  for (int i = 1; i < 7999; ++i) {
    const double a = SampleReference(s, (i - 1) * h).state.position.z();
    const double b = SampleReference(s, i * h).state.position.z();
    const double c = SampleReference(s, (i + 1) * h).state.position.z();
    ASSERT_NEAR(a - 2 * b + c, 0.0, 1e-12);
  }
}

TEST(ReferenceTest, VelocityIsDerivativeOfPosition) {
  TrajectorySpec s = Circle();
  s.kind = TrajectoryKind::kHelical;
  s.climb_rate = 0.05;
  s.phase = 0.3;
  const double h = 1e-5;
  for (double t : {1.0, 17.3, 55.0}) {
    const Vec3 fd = (SampleReference(s, t + h).state.position -
                     SampleReference(s, t - h).state.position) / (2 * h);
    EXPECT_LT((fd - SampleReference(s, t).state.velocity).norm(), 1e-8);
  }
}

TEST(ReferenceTest, SetpointIsStatic) {
  TrajectorySpec s;
  s.kind = TrajectoryKind::kSetpoint;
  s.center = {0.5, 0.5, 0.0};
  s.start_altitude = 1.0;
  s.duration = 10.0;
  const auto window = ReferenceWindow(s, 0.0, 5, 0.01);
  ASSERT_EQ(window.size(), 5u);
  for (const auto& r : window) {
    EXPECT_EQ(r, window.front());
    EXPECT_EQ(r.state.position, Vec3(0.5, 0.5, 1.0));
    EXPECT_EQ(r.state.velocity, Vec3::Zero());
  }
}

TEST(ReferenceTest, WindowOfOneMatchesSample) {
  const TrajectorySpec s = Circle();
  const auto window = ReferenceWindow(s, 12.34, 1, 0.01);
  ASSERT_EQ(window.size(), 1u);
  EXPECT_EQ(window[0], SampleReference(s, 12.34));
}

TEST(ReferenceTest, WindowQuarterPeriodSteps) {
  TrajectorySpec s = Circle();
  s.center = Vec3::Zero();
  s.radius = 1.0;
  s.angular_rate = 1.0;
  s.duration = 100.0;
  const auto w = ReferenceWindow(s, 0.0, 3, std::numbers::pi / 2);
  ASSERT_EQ(w.size(), 3u);
  EXPECT_NEAR(w[0].state.position.x(), 1.0, 1e-12);
  EXPECT_NEAR(w[0].state.position.y(), 0.0, 1e-12);
  EXPECT_NEAR(w[1].state.position.x(), 0.0, 1e-12);
  EXPECT_NEAR(w[1].state.position.y(), 1.0, 1e-12);
  EXPECT_NEAR(w[2].state.position.x(), -1.0, 1e-12);
  EXPECT_NEAR(w[2].state.position.y(), 0.0, 1e-12);
}

TEST(ReferenceTest, WindowClampsAtDuration) {
  const TrajectorySpec s = Circle();
  const auto w = ReferenceWindow(s, 79.95, 20, 0.01);
  const auto end = SampleReference(s, s.duration);
  for (int j = 6; j < 20; ++j) EXPECT_EQ(w[j], end);
  const auto after = ReferenceWindow(s, 80.0, 4, 0.01);
  for (const auto& r : after) EXPECT_EQ(r, end);
}

TEST(ReferenceTest, OutOfRangeTimeThrows) {
  const TrajectorySpec s = Circle();
  EXPECT_THROW(SampleReference(s, -0.001), std::out_of_range);
  EXPECT_THROW(SampleReference(s, 80.001), std::out_of_range);
  EXPECT_NO_THROW(SampleReference(s, 80.0));
}

TEST(ReferenceTest, InvalidSpecRejected) {
  TrajectorySpec s = Circle();
  s.radius = -1.0;
  EXPECT_THROW(s.Validate(), std::invalid_argument);
  s = Circle();
  s.duration = 0.0;
  EXPECT_THROW(s.Validate(), std::invalid_argument);
  s = Circle();
  s.angular_rate = std::nan("");
  EXPECT_THROW(s.Validate(), std::invalid_argument);
}

TEST(ReferenceTest, KindNames) {
  for (auto k : {TrajectoryKind::kSetpoint, TrajectoryKind::kCircular,
                 TrajectoryKind::kHelical}) {
    EXPECT_EQ(TrajectoryKindFromString(ToString(k)), k);
  }
  EXPECT_THROW(TrajectoryKindFromString("spiral"), std::invalid_argument);
}

}  // namespace
}  // namespace edgempc
