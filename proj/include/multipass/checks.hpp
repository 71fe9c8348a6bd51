#ifndef MULTIPASS_CHECKS_HPP
#define MULTIPASS_CHECKS_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace multipass {

struct CheckItem {
  std::string name;
  double observed = 0.0;
  double limit = 0.0;
  bool pass = false;
};

struct CheckReport {
  std::string suite;
  std::vector<CheckItem> items;
  bool pass = true;

  void add(std::string name, double observed, double limit);
};

// Convolution identity at desk scale: quadrature of the kernel product
// integral against the closed form Lambda_{q+q'}, 20 random point pairs
// for orders (1,1), (1.5,2.5), (2,2).
CheckReport kernel_check(std::uint64_t seed = 2026, std::size_t points = 20,
                         double tolerance = 1e-5);

// Averaged batch GD properties on a synthetic instance (alpha=2, r=1/4):
// spectral filter vs iterative equivalence at t in {10,100,1000}, raw
// batch GD training MSE monotonicity, the filter-definition bounds, and
// the n=1 degenerate SGD == batch equivalence. gamma == 0 selects the
// default 1/(4 R^2); oversized gamma makes the monotonicity and filter
// bounds fail by design.
CheckReport filter_check(double gamma = 0.0, std::size_t n = 32,
                         std::uint64_t seed = 2026);

// Semi-stochastic recursion properties: closed form vs iterative averaged
// iterate (d=8, t=200, 10 seeds) and the Monte Carlo variance bound on a
// power-law system (d=50, alpha=2, u in {0,1}, t in {10,100}).
CheckReport semistoch_check(std::uint64_t seed = 2026,
                            std::size_t reps = 200);

}  // namespace multipass

#endif
