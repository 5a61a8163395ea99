// Times the parallel kernels against their serial reference implementation
// and checks that both produce bitwise-identical results. Not a pass/fail
// test; speedups depend on the machine (and are ~1x on a single core).
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "localfid/dataset.hpp"
#include "localfid/explainer.hpp"
#include "localfid/fidelity.hpp"
#include "localfid/model.hpp"
#include "localfid/neighborhood.hpp"
#include "localfid/parallel.hpp"
#include "localfid/rho.hpp"
#include "localfid/rng.hpp"

using namespace localfid;

namespace {

template <class F>
double time_once(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

void report(const char* name, double serial, double openmp, bool identical) {
  std::printf("%-28s %9.3fs serial %9.3fs openmp  %5.2fx  results %s\n", name,
              serial, openmp, serial / openmp,
              identical ? "identical" : "DIFFER");
}

}  // namespace

int main() {
  std::printf("threads available: %d\n", hardware_threads());

  Dataset data = Dataset::make(2000, 10, "bench");
  RngStream rng(42);
  for (std::size_t i = 0; i < data.rows; ++i)
    for (std::size_t j = 0; j < data.cols; ++j) data.at(i, j) = rng.normal();

  const RegressionModel model =
      RegressionModel::closed(10, [](std::span<const double> x) {
        double s = 0;
        for (std::size_t j = 0; j < x.size(); ++j)
          s += std::sin(x[j]) * (j % 2 ? 0.5 : 1.0);
        return s + 0.3 * x[0] * x[1];
      });
  const NeighborhoodFamily family = NeighborhoodFamily::gaussian(10, 1.0);
  const ExplanationSystem system = make_explanation_system(
      ExplainerKind::mnf_wls, model, family, data, 1e-8);

  {
    std::vector<LocalLinearModel> a, b;
    const double ts = time_once(
        [&] { a = fit_mnf_batch(system, data, Exec::serial); });
    const double tp = time_once(
        [&] { b = fit_mnf_batch(system, data, Exec::openmp); });
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i)
      same = a[i].weights == b[i].weights && a[i].intercept == b[i].intercept;
    report("fit_mnf_batch (2000 fits)", ts, tp, same);
  }

  {
    RhoEstimate a, b;
    const double ts = time_once([&] {
      a = rho_monte_carlo(data, family, 20000, 0.05, 7, Exec::serial);
    });
    const double tp = time_once([&] {
      b = rho_monte_carlo(data, family, 20000, 0.05, 7, Exec::openmp);
    });
    report("rho_monte_carlo (20k draws)", ts, tp,
           a.value == b.value && a.stdError == b.stdError);
  }

  {
    Dataset evalSet = take_rows(data, [] {
      std::vector<std::size_t> idx(200);
      for (std::size_t i = 0; i < 200; ++i) idx[i] = i * 10;
      return idx;
    }());
    FidelityReport a, b;
    const double ts = time_once([&] {
      a = empirical_mnf(system, model, evalSet, 32, 5,
                        FidelityMetric::trainMnf, Exec::serial);
    });
    const double tp = time_once([&] {
      b = empirical_mnf(system, model, evalSet, 32, 5,
                        FidelityMetric::trainMnf, Exec::openmp);
    });
    report("empirical_mnf (200x32)", ts, tp,
           a.value == b.value && a.stdError == b.stdError);
  }

  return 0;
}
