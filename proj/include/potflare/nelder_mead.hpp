#pragma once

#include <functional>
#include <vector>

namespace potflare {

struct NelderMeadOptions {
  /// Stop when every vertex lies within this relative distance of the best.
  double tolerance{1e-9};
  int max_iterations{5000};
  /// Times the simplex is rebuilt around a converged point before giving up
  /// on confirmation.
  int max_restarts{2};
};

struct NelderMeadResult {
  std::vector<double> x;
  double value{0.0};
  int iterations{0};
  int evaluations{0};
  int restarts{0};
  double simplex_size{0.0};
  bool converged{false};
};

/// Minimizes `f` from `start` with an initial simplex of axis steps `steps`.
/// Infinite objective values are allowed and act as a hard barrier.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> start, const std::vector<double>& steps,
                             const NelderMeadOptions& options = {});

}  // namespace potflare
