#include "freshrec/stats.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "freshrec/error.hpp"
#include "freshrec/strings.hpp"

namespace freshrec {

ZTestResult two_proportion_ztest(std::int64_t clicks_a, std::int64_t n_a,
                                 std::int64_t clicks_b, std::int64_t n_b) {
  if (n_a < 1 || n_b < 1) fail("z-test sample sizes must be >= 1");
  if (clicks_a < 0 || clicks_b < 0 || clicks_a > n_a || clicks_b > n_b) {
    fail("z-test click counts must lie in [0, n]");
  }
  const double pa = static_cast<double>(clicks_a) / static_cast<double>(n_a);
  const double pb = static_cast<double>(clicks_b) / static_cast<double>(n_b);
  const double pooled = static_cast<double>(clicks_a + clicks_b) /
                        static_cast<double>(n_a + n_b);
  if (pooled <= 0.0 || pooled >= 1.0) return ZTestResult{0.0, 1.0};
  const double se = std::sqrt(pooled * (1.0 - pooled) *
                              (1.0 / static_cast<double>(n_a) +
                               1.0 / static_cast<double>(n_b)));
  const double z = (pa - pb) / se;
  // Two-sided: 2 * (1 - Phi(|z|)) = erfc(|z| / sqrt(2)).
  const double p = std::erfc(std::abs(z) / std::sqrt(2.0));
  return ZTestResult{z, p};
}

LiftReport make_lift_report(std::int64_t impressions_control,
                            std::int64_t clicks_control,
                            std::int64_t impressions_treatment,
                            std::int64_t clicks_treatment, double alpha,
                            std::uint64_t seed) {
  LiftReport report;
  report.impressions_control = impressions_control;
  report.clicks_control = clicks_control;
  report.impressions_treatment = impressions_treatment;
  report.clicks_treatment = clicks_treatment;
  report.alpha = alpha;
  report.seed = seed;
  if (impressions_control < 1 || impressions_treatment < 1) {
    fail("cannot build a lift report with an empty arm");
  }
  report.ctr_control = static_cast<double>(clicks_control) /
                       static_cast<double>(impressions_control);
  report.ctr_treatment = static_cast<double>(clicks_treatment) /
                         static_cast<double>(impressions_treatment);
  report.relative_lift =
      report.ctr_control > 0.0
          ? report.ctr_treatment / report.ctr_control - 1.0
          : 0.0;
  const ZTestResult zt = two_proportion_ztest(
      clicks_treatment, impressions_treatment, clicks_control,
      impressions_control);
  report.z_statistic = zt.z;
  report.p_value = zt.p_value;
  report.significant = zt.p_value < alpha;
  return report;
}

void save_lift_report(const std::string& path, const LiftReport& r) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail("cannot open '" + path + "' for writing");
  out << "impressions_control=" << r.impressions_control << '\n'
      << "clicks_control=" << r.clicks_control << '\n'
      << "impressions_treatment=" << r.impressions_treatment << '\n'
      << "clicks_treatment=" << r.clicks_treatment << '\n'
      << "ctr_control=" << fixed(r.ctr_control, 9) << '\n'
      << "ctr_treatment=" << fixed(r.ctr_treatment, 9) << '\n'
      << "relative_lift=" << fixed(r.relative_lift, 9) << '\n'
      << "z_statistic=" << fixed(r.z_statistic, 9) << '\n'
      << "p_value=" << fixed(r.p_value, 9) << '\n'
      << "alpha=" << fixed(r.alpha, 9) << '\n'
      << "significant=" << (r.significant ? 1 : 0) << '\n'
      << "seed=" << r.seed << '\n';
  if (!out.flush()) fail("failed writing lift report to '" + path + "'");
}

LiftReport load_lift_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open lift report '" + path + "'");
  std::unordered_map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail("'" + path + "' line " + std::to_string(line_no) + ": expected key=value");
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto need = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) fail("lift report '" + path + "' is missing '" + key + "'");
    return it->second;
  };
  LiftReport r;
  r.impressions_control = parse_i64(need("impressions_control"), "impressions_control");
  r.clicks_control = parse_i64(need("clicks_control"), "clicks_control");
  r.impressions_treatment = parse_i64(need("impressions_treatment"), "impressions_treatment");
  r.clicks_treatment = parse_i64(need("clicks_treatment"), "clicks_treatment");
  r.ctr_control = parse_f64(need("ctr_control"), "ctr_control");
  r.ctr_treatment = parse_f64(need("ctr_treatment"), "ctr_treatment");
  r.relative_lift = parse_f64(need("relative_lift"), "relative_lift");
  r.z_statistic = parse_f64(need("z_statistic"), "z_statistic");
  r.p_value = parse_f64(need("p_value"), "p_value");
  r.alpha = parse_f64(need("alpha"), "alpha");
  r.significant = parse_i64(need("significant"), "significant") != 0;
  r.seed = static_cast<std::uint64_t>(parse_i64(need("seed"), "seed"));
  return r;
}

std::string render_lift_report(const LiftReport& r) {
  std::ostringstream out;
  out << "A/B experiment result (seed " << r.seed << ")\n"
      << "  control:   " << r.clicks_control << " clicks / "
      << r.impressions_control << " impressions, ctr "
      << fixed(r.ctr_control, 6) << '\n'
      << "  treatment: " << r.clicks_treatment << " clicks / "
      << r.impressions_treatment << " impressions, ctr "
      << fixed(r.ctr_treatment, 6) << '\n'
      << "  relative lift: " << fixed(r.relative_lift * 100.0, 4) << "%\n"
      << "  z = " << fixed(r.z_statistic, 4) << ", p = " << fixed(r.p_value, 6)
      << (r.significant ? " (significant at alpha " : " (not significant at alpha ")
      << fixed(r.alpha, 3) << ")\n";
  return out.str();
}

}  // namespace freshrec
