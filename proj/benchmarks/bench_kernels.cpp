// Times the parallel kernel entry points against the serial reference and
// checks they produce bitwise-identical results.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "mtvrp/kernels.hpp"
#include "mtvrp/parallel.hpp"
#include "mtvrp/rng.hpp"

using namespace mtvrp;

namespace {

template <class F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (dt < best) best = dt;
  }
  return best;
}

Mat<float> random_mat(int r, int c, Rng& rng) {
  Mat<float> m(r, c);
  for (auto& v : m.a) v = static_cast<float>(rng.uniform(-1, 1));
  return m;
}

bool bitwise_equal(const Mat<float>& a, const Mat<float>& b) {
  return a.a.size() == b.a.size() &&
         std::memcmp(a.a.data(), b.a.data(), a.a.size() * sizeof(float)) == 0;
}

}  // namespace

int main() {
  Rng rng(42);
  std::printf("threads: %d\n", parallel::max_threads());
  std::printf("%-14s %6s %12s %12s %8s %6s\n", "kernel", "size", "serial(ms)", "parallel(ms)",
              "speedup", "equal");

  for (int n : {128, 256, 512, 1024}) {
    Mat<float> a = random_mat(n, n, rng), b = random_mat(n, n, rng);
    Mat<float> cs(n, n), cp(n, n);
    const double ts = time_best_of(3, [&] { kernels::serial::matmul_nt(a, b, cs); });
    const double tp = time_best_of(3, [&] { kernels::matmul_nt(a, b, cp); });
    std::printf("%-14s %6d %12.3f %12.3f %7.2fx %6s\n", "matmul_nt", n, ts * 1e3, tp * 1e3,
                ts / tp, bitwise_equal(cs, cp) ? "yes" : "NO");
  }

  for (int n : {256, 1024, 4096}) {
    Mat<float> x = random_mat(n, 256, rng);
    Mat<uint8_t> mask(n, 256);
    for (auto& v : mask.a) v = rng.below(4) ? 1 : 0;
    Mat<float> ys(n, 256), yp(n, 256);
    const double ts = time_best_of(3, [&] { kernels::serial::softmax_rows(x, &mask, ys); });
    const double tp = time_best_of(3, [&] { kernels::softmax_rows(x, &mask, yp); });
    std::printf("%-14s %6d %12.3f %12.3f %7.2fx %6s\n", "softmax_rows", n, ts * 1e3, tp * 1e3,
                ts / tp, bitwise_equal(ys, yp) ? "yes" : "NO");
  }

  for (int n : {256, 1024, 4096}) {
    Mat<float> x = random_mat(n, 256, rng);
    Mat<float> g = random_mat(1, 256, rng);
    Mat<float> ys(n, 256), yp(n, 256);
    const double ts =
        time_best_of(3, [&] { kernels::serial::rmsnorm_rows(x, g, 1e-8f, ys); });
    const double tp = time_best_of(3, [&] { kernels::rmsnorm_rows(x, g, 1e-8f, yp); });
    std::printf("%-14s %6d %12.3f %12.3f %7.2fx %6s\n", "rmsnorm_rows", n, ts * 1e3, tp * 1e3,
                ts / tp, bitwise_equal(ys, yp) ? "yes" : "NO");
  }
  return 0;
}
