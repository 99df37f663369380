// Acceptance run: one PASS/FAIL line per criterion, full parameters.
#include <cstdio>
#include <functional>
#include <vector>

#include "bn/verify.hpp"

using namespace bn;

int main() {
  const std::vector<std::function<CheckResult(Level)>> criteria = {
      check_oracle, check_conservation, check_stationarity, check_weak_zeros, check_kappa,
      check_riccati, check_blowup,      check_comparison,   check_gbeta,      check_singular};
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const CheckResult r = criteria[k](Level::full);
    std::printf("%s criterion %zu: %s: %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", k + 1, r.name.c_str(), r.detail.c_str(),
                r.seconds);
    std::fflush(stdout);
    failed += r.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
