#include <chrono>
#include <iomanip>
#include <iostream>

#include "dnys/datasets.hpp"
#include "dnys/kernel.hpp"
#include "dnys/nystrom.hpp"
#include "dnys/sampling.hpp"
#include "dnys/verify.hpp"

// Compares the OpenMP kernels against their serial reference
// implementations: Gram assembly, the sampled block Frobenius error and the
// brute-force subset-expectation sums.

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
double time_ms(F&& f, int reps = 3) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    f();
    const auto t1 = Clock::now();
    best = std::min(best,
                    std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::cout << std::left << std::setw(28) << name << std::right << std::fixed
            << std::setprecision(2) << std::setw(10) << serial_ms << " ms"
            << std::setw(10) << parallel_ms << " ms   x"
            << std::setprecision(2) << serial_ms / parallel_ms << "\n";
}

}  // namespace

int main() {
  std::cout << std::left << std::setw(28) << "kernel" << std::right
            << std::setw(13) << "serial" << std::setw(13) << "openmp\n";

  {
    const dnys::DataMatrix data =
        dnys::generate_toy_regression(4000, 8, 0.0, 1.0, 7);
    dnys::KernelMatrix k_par, k_ser;
    const double ser = time_ms([&] { k_ser = dnys::ref::gram(data, 2.0); });
    const double par = time_ms([&] { k_par = dnys::gram(data, 2.0); });
    if (k_ser.entries != k_par.entries) {
      std::cerr << "gram: parallel result differs from serial\n";
      return 1;
    }
    report("gram n=4000", ser, par);

    const dnys::LandmarkSet c = dnys::sample_uniform(4000, 300, 3);
    dnys::Matrix x_par, x_ser;
    const double cser =
        time_ms([&] { x_ser = dnys::ref::cross_gram(data, c, 2.0); });
    const double cpar = time_ms([&] { x_par = dnys::cross_gram(data, c, 2.0); });
    if (x_ser != x_par) {
      std::cerr << "cross_gram: parallel result differs from serial\n";
      return 1;
    }
    report("cross_gram n=4000 k=300", cser, cpar);

    const dnys::NystromFactor factor = dnys::build(data, 2.0, c);
    double e_par = 0, e_ser = 0;
    const double bser = time_ms([&] {
      e_ser = dnys::ref::frobenius_error_sampled(data, 2.0, factor, 50, 500, 11);
    });
    const double bpar = time_ms([&] {
      e_par = dnys::frobenius_error_sampled(data, 2.0, factor, 50, 500, 11);
    });
    if (std::abs(e_ser - e_par) > 1e-12 * std::max(1.0, std::abs(e_ser))) {
      std::cerr << "frobenius_error_sampled: parallel deviates from serial\n";
      return 1;
    }
    report("sampled error 50x500", bser, bpar);
  }

  {
    const dnys::KernelMatrix k = dnys::random_test_kernel(13, 99);
    const dnys::DppEnumeration e = dnys::enumerate_dpp(k, 1.0);
    dnys::SubsetExpectations se_par, se_ser;
    const double ser =
        time_ms([&] { se_ser = dnys::ref::subset_expectations(k, e); }, 1);
    const double par =
        time_ms([&] { se_par = dnys::subset_expectations(k, e); }, 1);
    const double dev =
        (se_ser.inv_embed - se_par.inv_embed).cwiseAbs().maxCoeff();
    if (dev > 1e-12) {
      std::cerr << "subset_expectations: parallel deviates from serial\n";
      return 1;
    }
    report("subset expectations n=13", ser, par);
  }

  return 0;
}
