// Desk-scale reproduction on the public sepsis logs. Exits 77 (skipped) when
// PPM_BENCH_DATA does not point at a directory holding them.

#include <cmath>
#include <cstdio>

#include "bench_common.hpp"

int main() {
  const auto dir = ppm::bench::data_dir();
  if (!dir) {
    std::puts("SKIP benchmark: PPM_BENCH_DATA is not set; sepsis_cases_2/3 are not bundled");
    return 77;
  }
  bool ok = true;
  for (const auto& t : ppm::bench::kTargets) {
    const auto log = ppm::bench::load_dataset(*dir, t.dataset);
    const double f = ppm::bench::best_family_score(log, t.dataset);
    const bool pass = std::abs(f - t.reference) <= ppm::bench::kTolerance;
    std::printf("%s %s: average F %.2f, reference %.2f, tolerance %.1f\n", pass ? "PASS" : "FAIL", t.dataset, f,
                t.reference, ppm::bench::kTolerance);
    ok = ok && pass;
  }
  return ok ? 0 : 1;
}
