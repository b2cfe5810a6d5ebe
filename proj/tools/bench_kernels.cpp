// Timing table for the data-parallel kernels against their serial twins.
// Also asserts bitwise equality, since that is the whole point of the
// counter-based streams.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#include <Eigen/Dense>

#include "covrec/kernels.hpp"

namespace {

using covrec::kernels::chol_sample_rows;
using covrec::kernels::chol_sample_rows_serial;
using covrec::kernels::covariance_mle;
using covrec::kernels::covariance_mle_serial;
using covrec::kernels::kl_sample_rows;
using covrec::kernels::kl_sample_rows_serial;
using covrec::kernels::row_mean;
using covrec::kernels::taper_apply;
using covrec::kernels::taper_apply_serial;

double best_ms(const std::function<void()>& fn, int reps = 3) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best,
                    std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, const char* shape, double serial_ms,
            double parallel_ms, double maxdiff) {
  std::printf("%-16s %-22s %10.2f %10.2f %8.2fx %s\n", name, shape, serial_ms,
              parallel_ms, serial_ms / parallel_ms,
              maxdiff == 0.0 ? "bitwise-equal" : "DIFFERS");
}

}  // namespace

int main() {
  std::printf("%-16s %-22s %10s %10s %9s %s\n", "kernel", "shape", "serial",
              "parallel", "speedup", "check");
  std::printf("%-16s %-22s %10s %10s\n", "", "", "(ms)", "(ms)");

  {
    const int M = 2048, n = 1024, L = 128;
    Eigen::MatrixXd B(n, L);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < L; ++j) B(i, j) = std::sin(0.37 * i + 1.1 * j);
    Eigen::MatrixXd Xp(M, n), Xs(M, n);
    const double tp = best_ms([&] { kl_sample_rows(B, 42, Xp); });
    const double ts = best_ms([&] { kl_sample_rows_serial(B, 42, Xs); });
    report("kl_sample_rows", "M=2048 n=1024 L=128", ts, tp,
           (Xp - Xs).cwiseAbs().maxCoeff());
  }
  {
    const int M = 2048, n = 512;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) A(i, j) = 1.0 / (1.0 + i + j);
    Eigen::MatrixXd Xp(M, n), Xs(M, n);
    const double tp = best_ms([&] { chol_sample_rows(A, 7, Xp); });
    const double ts = best_ms([&] { chol_sample_rows_serial(A, 7, Xs); });
    report("chol_sample_rows", "M=2048 n=512", ts, tp,
           (Xp - Xs).cwiseAbs().maxCoeff());

    const Eigen::VectorXd mu = row_mean(Xp);
    Eigen::MatrixXd Cp, Cs;
    const double tcp = best_ms([&] { covariance_mle(Xp, mu, Cp); });
    const double tcs = best_ms([&] { covariance_mle_serial(Xp, mu, Cs); });
    report("covariance_mle", "M=2048 n=512", tcs, tcp,
           (Cp - Cs).cwiseAbs().maxCoeff());

    Eigen::MatrixXd Tp, Ts;
    const double ttp = best_ms([&] { taper_apply(Cp, 64, Tp); });
    const double tts = best_ms([&] { taper_apply_serial(Cp, 64, Ts); });
    report("taper_apply", "n=512 tau=64", tts, ttp,
           (Tp - Ts).cwiseAbs().maxCoeff());
  }
  return 0;
}
