#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace msde {

// One named check. `pass` is always a pure function of the stored numbers;
// Monte-Carlo entries carry a standard error and use |value - target| <=
// 3*se + tol, deterministic entries use se = nullopt.
struct ReportEntry {
  std::string name;
  double value = 0.0;
  double target = 0.0;
  double tol = 0.0;
  std::optional<double> se;
  bool pass = false;
  std::string note;

  static ReportEntry deterministic(std::string name, double value, double target, double tol,
                                   std::string note = "") {
    ReportEntry e;
    e.name = std::move(name);
    e.value = value;
    e.target = target;
    e.tol = tol;
    e.pass = std::abs(value - target) <= tol;
    e.note = std::move(note);
    return e;
  }

  static ReportEntry monte_carlo(std::string name, double value, double target, double slack,
                                 double se, std::string note = "") {
    ReportEntry e;
    e.name = std::move(name);
    e.value = value;
    e.target = target;
    e.tol = slack;
    e.se = se;
    e.pass = std::abs(value - target) <= 3.0 * se + slack;
    e.note = std::move(note);
    return e;
  }

  // one-sided check value >= bound (tol = allowed shortfall)
  static ReportEntry lower_bound(std::string name, double value, double bound,
                                 std::string note = "") {
    ReportEntry e;
    e.name = std::move(name);
    e.value = value;
    e.target = bound;
    e.pass = value >= bound;
    e.note = std::move(note);
    return e;
  }
};

struct VerificationReport {
  std::vector<ReportEntry> entries;
  std::map<std::string, std::string> meta;

  bool all_pass() const {
    for (const auto& e : entries)
      if (!e.pass) return false;
    return true;
  }
  void add(ReportEntry e) { entries.push_back(std::move(e)); }
  void append(const VerificationReport& other) {
    entries.insert(entries.end(), other.entries.begin(), other.entries.end());
  }
};

std::string report_to_json(const VerificationReport& report);

}  // namespace msde
