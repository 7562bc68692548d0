#pragma once

namespace partout::plan {

inline constexpr double kPageTuples = 1024.0;

/// Coefficients of the distributed cost model.
struct CostModel {
  double t_page = 10000;  // per transferred page
  double c_scan = 1;
  double c_cmp = 1;
  double c_out = 1;
  double c_build = 2;
  double c_probe = 1;
  /// Per triple stored on the scanning host; 0 disables the term.
  double c_host_scan = 0;

  friend bool operator==(const CostModel&, const CostModel&) = default;
};

}  // namespace partout::plan
