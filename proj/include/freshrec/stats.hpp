#pragma once

#include <cstdint>
#include <string>

namespace freshrec {

struct ZTestResult {
  double z = 0.0;
  double p_value = 1.0;
};

// Pooled two-proportion z-test, two-sided. z is signed as proportion(a)
// minus proportion(b). A degenerate pooled proportion (0 or 1) yields
// z = 0, p = 1. Sample sizes must be >= 1.
ZTestResult two_proportion_ztest(std::int64_t clicks_a, std::int64_t n_a,
                                 std::int64_t clicks_b, std::int64_t n_b);

// A/B outcome over the experiment phase. relative_lift is
// ctr_treatment / ctr_control - 1 (0 when the control CTR is zero).
struct LiftReport {
  std::int64_t impressions_control = 0;
  std::int64_t clicks_control = 0;
  std::int64_t impressions_treatment = 0;
  std::int64_t clicks_treatment = 0;
  double ctr_control = 0.0;
  double ctr_treatment = 0.0;
  double relative_lift = 0.0;
  double z_statistic = 0.0;  // treatment minus control
  double p_value = 1.0;
  double alpha = 0.05;
  bool significant = false;
  std::uint64_t seed = 0;
};

LiftReport make_lift_report(std::int64_t impressions_control,
                            std::int64_t clicks_control,
                            std::int64_t impressions_treatment,
                            std::int64_t clicks_treatment, double alpha,
                            std::uint64_t seed);

// Machine-readable key=value form and the human-readable rendering.
void save_lift_report(const std::string& path, const LiftReport& report);
LiftReport load_lift_report(const std::string& path);
std::string render_lift_report(const LiftReport& report);

}  // namespace freshrec
