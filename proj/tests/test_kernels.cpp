#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "privsub/error.hpp"
#include "privsub/kernels.hpp"
#include "privsub/sim.hpp"

using namespace privsub;
using namespace privsub::kernels;

namespace {

struct KyleBuffers {
  static constexpr int kFields = 15;
  std::vector<std::vector<double>> f;

  KyleBuffers(std::size_t n, std::mt19937_64& gen) : f(kFields, std::vector<double>(n)) {
    std::normal_distribution<double> z;
    for (auto& col : f)
      for (auto& x : col) x = z(gen);
    for (auto& x : f[9]) x = std::fabs(x);   // zero_sum_max
    for (auto& x : f[10]) x = std::fabs(x);  // mean_gap_max
  }

  KyleLanes lanes() {
    return {f[0].data(), f[1].data(), f[2].data(), f[3].data(), f[4].data(),  f[5].data(),  f[6].data(), f[7].data(),
            f[8].data(), f[9].data(), f[10].data(), f[11].data(), f[12].data(), f[13].data(), f[14].data()};
  }
};

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("isa parsing and dispatch") {
  CHECK(parse_isa("scalar") == Isa::Scalar);
  CHECK(parse_isa("auto") == best_isa());
  CHECK_THROWS_AS(parse_isa("sse9"), ValidationError);
  CHECK(isa_available(Isa::Scalar));
  CHECK(table(Isa::Scalar).isa == Isa::Scalar);
  CHECK(isa_name(Isa::Avx2) == "avx2");
  if (!isa_available(Isa::Avx2)) CHECK_THROWS_AS(table(Isa::Avx2), ValidationError);
}

#if defined(PRIVSUB_HAVE_AVX2)
TEST_CASE("avx2 kyle kernels match scalar bit for bit") {
  if (!isa_available(Isa::Avx2)) return;
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> coef(0.01, 3.0);
  for (std::size_t n : {1u, 3u, 4u, 5u, 8u, 13u, 64u, 67u}) {
    for (int post = 0; post < 2; ++post) {
      KyleBuffers a(n, gen);
      KyleBuffers b = a;
      std::vector<double> zu(n), ze(n);
      std::normal_distribution<double> z;
      for (int rep = 0; rep < 5; ++rep) {
        for (auto& x : zu) x = z(gen);
        for (auto& x : ze) x = z(gen);
        const KyleStep s{coef(gen), coef(gen), rep == 0 ? 0.0 : coef(gen), coef(gen), coef(gen) / 3.0};
        if (post) {
          scalar::kyle_step_post(s, a.lanes(), zu.data(), ze.data(), n);
          avx2::kyle_step_post(s, b.lanes(), zu.data(), ze.data(), n);
        } else {
          scalar::kyle_step_pre(s, a.lanes(), zu.data(), ze.data(), n);
          avx2::kyle_step_pre(s, b.lanes(), zu.data(), ze.data(), n);
        }
      }
      for (int k = 0; k < KyleBuffers::kFields; ++k) {
        INFO("n=" << n << " post=" << post << " field=" << k);
        CHECK(bitwise_equal(a.f[k], b.f[k]));
      }
    }
  }
}

TEST_CASE("avx2 kyle kernel handles zero flow") {
  if (!isa_available(Isa::Avx2)) return;
  std::mt19937_64 gen(5);
  KyleBuffers a(6, gen);
  for (auto& x : a.f[0]) x = 0.0;
  for (auto& x : a.f[1]) x = 0.0;
  KyleBuffers b = a;
  std::vector<double> zero(6, 0.0);
  const KyleStep s{0.5, 0.3, 0.2, 0.7, 0.1};
  scalar::kyle_step_post(s, a.lanes(), zero.data(), zero.data(), 6);
  avx2::kyle_step_post(s, b.lanes(), zero.data(), zero.data(), 6);
  for (int k = 0; k < KyleBuffers::kFields; ++k) CHECK(bitwise_equal(a.f[k], b.f[k]));
  for (double x : a.f[7]) CHECK(std::isfinite(x));
}

TEST_CASE("avx2 lvr kernel matches scalar bit for bit") {
  if (!isa_available(Isa::Avx2)) return;
  std::mt19937_64 gen(9);
  std::lognormal_distribution<double> lg(0.0, 0.05);
  for (std::size_t n : {1u, 2u, 4u, 7u, 16u, 33u}) {
    std::vector<std::vector<double>> a(6, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      a[0][i] = lg(gen) * 10.0;
      a[1][i] = std::sqrt(a[0][i]);
      a[4][i] = INFINITY;
    }
    auto b = a;
    std::vector<double> growth(n);
    const LvrStep s{100.0, 0.005 * 200.0 / 2000.0};
    for (int rep = 0; rep < 10; ++rep) {
      for (auto& g : growth) g = lg(gen);
      scalar::lvr_step(s, {a[0].data(), a[1].data(), a[2].data(), a[3].data(), a[4].data(), a[5].data()},
                       growth.data(), n);
      avx2::lvr_step(s, {b[0].data(), b[1].data(), b[2].data(), b[3].data(), b[4].data(), b[5].data()},
                     growth.data(), n);
    }
    for (int k = 0; k < 6; ++k) CHECK(bitwise_equal(a[k], b[k]));
  }
}

TEST_CASE("full simulation is identical across kernels") {
  if (!isa_available(Isa::Avx2)) return;
  const auto eq = solve_equilibrium({1.0, 1.0, 1.0, 1.0, 0.0});
  SimConfig cfg;
  cfg.n_steps = 50;
  cfg.n_paths = 203;
  cfg.threads = 1;
  cfg.insider_buckets = 5;
  for (auto clearing : {Clearing::Post, Clearing::Pre}) {
    cfg.clearing = clearing;
    cfg.isa = Isa::Scalar;
    const auto a = simulate_paths(eq, cfg);
    cfg.isa = Isa::Avx2;
    const auto b = simulate_paths(eq, cfg);
    CHECK(bitwise_equal(a.path_pi_I, b.path_pi_I));
    CHECK(bitwise_equal(a.path_pi_N, b.path_pi_N));
    CHECK(bitwise_equal(a.path_pi_M, b.path_pi_M));
    CHECK(bitwise_equal(a.path_volume, b.path_volume));
    CHECK(bitwise_equal(a.path_fee_base_I, b.path_fee_base_I));
    CHECK(a.price_mean_gap_max == b.price_mean_gap_max);
    CHECK(a.zero_sum_max == b.zero_sum_max);
  }
}
#endif
