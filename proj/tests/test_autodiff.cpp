#include <cmath>
#include <functional>

#include "doctest.h"
#include "mtvrp/autodiff.hpp"

using namespace mtvrp;

namespace {

void fill_random(ad::ParamStore<double>& store, uint64_t seed) {
  Rng rng(seed);
  for (auto& e : store.entries)
    for (auto& v : e.value.a) v = rng.uniform(-1.5, 1.5);
}

// Central finite differences over every parameter scalar against the
// recorded backward pass. build() must return a 1x1 loss.
template <class F>
void check_gradients(ad::ParamStore<double>& store, F build, double h = 1e-6,
                     double tol = 1e-6) {
  store.zero_grad();
  {
    ad::Tape<double> tape(&store, true);
    auto loss = build(tape);
    REQUIRE(tape.val(loss).rows == 1);
    REQUIRE(tape.val(loss).cols == 1);
    tape.backward(loss);
  }
  for (auto& e : store.entries) {
    for (size_t k = 0; k < e.value.a.size(); ++k) {
      const double orig = e.value.a[k];
      e.value.a[k] = orig + h;
      ad::Tape<double> tp(&store, false);
      const double lp = tp.val(build(tp)).at(0, 0);
      e.value.a[k] = orig - h;
      ad::Tape<double> tm(&store, false);
      const double lm = tm.val(build(tm)).at(0, 0);
      e.value.a[k] = orig;
      const double fd = (lp - lm) / (2 * h);
      const double ga = e.grad.size() ? e.grad.a[k] : 0.0;
      const double err = std::abs(fd - ga) / std::max({1e-4, std::abs(fd), std::abs(ga)});
      INFO(e.name << "[" << k << "] analytic " << ga << " numeric " << fd);
      CHECK(err < tol);
    }
  }
}

std::vector<double> ones(int n) { return std::vector<double>(n, 1.0); }

}  // namespace

TEST_CASE("linear layer gradients") {
  ad::ParamStore<double> store;
  store.add("x", 3, 4);
  store.add("w", 5, 4);
  store.add("b", 1, 5);
  fill_random(store, 11);
  check_gradients(store, [](ad::Tape<double>& t) {
    auto y = t.linear(t.param("x"), t.param("w"), t.param("b"));
    auto col = t.rowwise_dot(y, y);
    return t.weighted_sum(col, ones(3));
  });
}

TEST_CASE("matmul gradients") {
  ad::ParamStore<double> store;
  store.add("a", 3, 4);
  store.add("b", 5, 4);
  store.add("c", 4, 2);
  fill_random(store, 12);
  check_gradients(store, [](ad::Tape<double>& t) {
    auto nt = t.matmul_nt(t.param("a"), t.param("b"));  // 3x5
    auto nn = t.matmul_nn(t.param("b"), t.param("c"));  // 5x2
    auto joined = t.matmul_nn(nt, nn);                  // 3x2
    return t.weighted_sum(t.rowwise_dot(joined, joined), ones(3));
  });
}

TEST_CASE("add scale and scale_rows gradients") {
  ad::ParamStore<double> store;
  store.add("a", 4, 3);
  store.add("b", 4, 3);
  store.add("s", 4, 1);
  fill_random(store, 13);
  check_gradients(store, [](ad::Tape<double>& t) {
    auto sum = t.add(t.param("a"), t.scale(t.param("b"), 0.37));
    auto scaled = t.scale_rows(sum, t.param("s"));
    return t.weighted_sum(t.rowwise_dot(scaled, sum), ones(4));
  });
}

TEST_CASE("concat slice and gather gradients") {
  ad::ParamStore<double> store;
  store.add("a", 3, 2);
  store.add("b", 3, 4);
  store.add("c", 2, 6);
  fill_random(store, 14);
  check_gradients(store, [](ad::Tape<double>& t) {
    auto cc = t.concat_cols({t.param("a"), t.param("b")});  // 3x6
    auto cr = t.concat_rows(cc, t.param("c"));              // 5x6
    auto sl = t.slice_cols(cr, 1, 4);                       // 5x3
    auto ga = t.gather_rows(sl, {0, 4, 2, 4});              // 4x3, repeats included
    auto pick = t.gather_cols_per_row(ga, {0, 2, 1, 0});    // 4x1
    return t.weighted_sum(pick, {1.0, -2.0, 0.5, 1.5});
  });
}

TEST_CASE("softmax log_softmax and topk softmax gradients") {
  ad::ParamStore<double> store;
  store.add("x", 4, 6);
  fill_random(store, 15);
  Mat<uint8_t> mask(4, 6);
  for (auto& v : mask.a) v = 1;
  mask.at(1, 2) = 0;
  mask.at(1, 5) = 0;
  mask.at(3, 0) = 0;
  check_gradients(store, [mask](ad::Tape<double>& t) {
    auto sm = t.softmax_rows(t.param("x"), mask);
    return t.weighted_sum(t.rowwise_dot(sm, sm), ones(4));
  });
  // Log-probabilities are -inf at masked entries, so read them only at
  // unmasked columns (column 1 is unmasked in every row here).
  check_gradients(store, [mask](ad::Tape<double>& t) {
    auto ls = t.log_softmax_rows(t.param("x"), mask);
    auto picked = t.gather_cols_per_row(ls, {1, 1, 1, 1});
    return t.weighted_sum(picked, {1.0, 0.5, -1.0, 2.0});
  });
  // Top-k selection is frozen at the forward values, so gradients flow only
  // through the kept entries; keep values well separated to dodge ties.
  ad::ParamStore<double> store2;
  store2.add("x", 3, 5);
  Rng rng(99);
  {
    std::vector<double> vals = {0.1, 1.3, -0.7, 2.2, -1.9, 0.6, 1.0, -0.2,
                                1.7, -1.1, 0.3, 2.0, -0.5, 0.9, -1.4};
    auto& e = store2.entries[0];
    for (size_t i = 0; i < e.value.a.size(); ++i) e.value.a[i] = vals[i];
  }
  check_gradients(store2, [](ad::Tape<double>& t) {
    auto sm = t.softmax_topk_rows(t.param("x"), 3);
    return t.weighted_sum(t.rowwise_dot(sm, sm), ones(3));
  });
}

TEST_CASE("rmsnorm gelu and tanh gradients") {
  ad::ParamStore<double> store;
  store.add("x", 3, 5);
  store.add("g", 1, 5);
  fill_random(store, 16);
  check_gradients(store, [](ad::Tape<double>& t) {
    auto n = t.rmsnorm(t.param("x"), t.param("g"));
    auto act = t.gelu(n);
    auto th = t.tanh_op(act);
    return t.weighted_sum(t.rowwise_dot(th, act), ones(3));
  });
}

TEST_CASE("non-recording tape computes identical values") {
  ad::ParamStore<double> store;
  store.add("x", 4, 4);
  store.add("g", 1, 4);
  fill_random(store, 17);
  auto run = [&](bool record) {
    ad::Tape<double> t(&store, record);
    auto y = t.gelu(t.rmsnorm(t.param("x"), t.param("g")));
    return t.val(y);
  };
  const Mat<double> a = run(true);
  const Mat<double> b = run(false);
  for (size_t i = 0; i < a.a.size(); ++i) CHECK(a.a[i] == b.a[i]);
}

TEST_CASE("backward accumulates into external sinks when given") {
  ad::ParamStore<double> store;
  store.add("x", 2, 2);
  fill_random(store, 18);
  std::vector<Mat<double>> sinks(store.entries.size());
  {
    ad::Tape<double> t(&store, true, &sinks);
    auto loss = t.weighted_sum(t.rowwise_dot(t.param("x"), t.param("x")), ones(2));
    t.backward(loss);
  }
  // Store gradients stay untouched; sink holds 2*x.
  for (const auto& e : store.entries)
    for (double g : e.grad.a) CHECK(g == 0.0);
  REQUIRE(sinks[0].rows == 2);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      CHECK(sinks[0].at(r, c) == doctest::Approx(2 * store.entries[0].value.at(r, c)));
}

TEST_CASE("parameter gradients accumulate across two backward calls") {
  ad::ParamStore<double> store;
  store.add("x", 2, 1);
  store.entries[0].value.at(0, 0) = 0.5;
  store.entries[0].value.at(1, 0) = -0.25;
  store.zero_grad();
  for (int rep = 0; rep < 2; ++rep) {
    ad::Tape<double> t(&store, true);
    auto loss = t.weighted_sum(t.param("x"), {2.0, 3.0});
    t.backward(loss);
  }
  CHECK(store.entries[0].grad.at(0, 0) == doctest::Approx(4.0));
  CHECK(store.entries[0].grad.at(1, 0) == doctest::Approx(6.0));
}

TEST_CASE("init_uniform fills gains with one and others within fan-in bounds") {
  ad::ParamStore<double> store;
  store.add("layer.w", 6, 9);
  store.add("norm.g", 1, 7);
  Rng rng(5);
  store.init_uniform(rng);
  for (double v : store.entries[1].value.a) CHECK(v == 1.0);
  const double bound = 1.0 / std::sqrt(9.0);
  bool any_nonzero = false;
  for (double v : store.entries[0].value.a) {
    CHECK(std::abs(v) <= bound);
    any_nonzero |= v != 0.0;
  }
  CHECK(any_nonzero);
}
