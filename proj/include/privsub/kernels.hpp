#pragma once

// Per-step batch kernels for the Monte Carlo engines. Each kernel advances n
// independent paths stored structure-of-arrays. Every ISA variant performs the
// same IEEE operations in the same order (no FMA contraction), so variants are
// bitwise interchangeable.

#include <cstddef>
#include <string_view>

namespace privsub::kernels {

enum class Isa { Scalar, Avx2 };

// Mutable per-lane state of the Kyle market simulation.
struct KyleLanes {
  double* v;            // asset value (read only)
  double* p;            // committed price
  double* m;            // exact Kalman posterior mean
  double* profit_I;
  double* profit_N;
  double* profit_M;
  double* volume;       // sum |dx + du|
  double* fee_base_I;   // sum |dy| * |dx| / (|dx| + |du|)
  double* fee_base_N;   // sum |dy| * |du| / (|dx| + |du|)
  double* zero_sum_max; // running max |profit_I + profit_N + profit_M|
  double* mean_gap_max; // running max |p - m|
  // Per-step outputs of the latest step, overwritten each call.
  double* dx;
  double* du;
  double* deps;
  double* dy_obs;
};

struct KyleStep {
  double beta_dt;     // beta(t_k) * dt
  double noise_sd;    // sigma_u * sqrt(dt)
  double privacy_sd;  // sigma_eps(t_k) * sqrt(dt)
  double lambda;
  double gain;        // exact discrete Kalman gain for this step
};

struct LvrLanes {
  double* q;         // reference price
  double* sqrt_q;
  double* lvr;       // realised rebalancing loss
  double* integral;  // sum of (sigma^2/8) V(q_k) dt
  double* min_step;  // running min of the per-step realised loss
  double* step;      // latest per-step loss
};

struct LvrStep {
  double sqrt_k;
  double rate_dt;  // (sigma^2 / 8) * 2 sqrt(k) * dt, multiplies sqrt(q_k)
};

using KyleStepFn = void (*)(const KyleStep&, const KyleLanes&, const double* z_u, const double* z_eps,
                            std::size_t n);
using LvrStepFn = void (*)(const LvrStep&, const LvrLanes&, const double* growth, std::size_t n);

struct KernelTable {
  Isa isa;
  KyleStepFn kyle_step_post;  // trades settle at the post-update price
  KyleStepFn kyle_step_pre;   // trades settle at the pre-update price
  LvrStepFn lvr_step;
};

bool isa_available(Isa isa);
Isa best_isa();
const KernelTable& table(Isa isa);  // throws ValidationError if unavailable

std::string_view isa_name(Isa isa);
// "auto" | "scalar" | "avx2"; "auto" resolves to best_isa().
Isa parse_isa(std::string_view name);

namespace scalar {
void kyle_step_post(const KyleStep&, const KyleLanes&, const double*, const double*, std::size_t);
void kyle_step_pre(const KyleStep&, const KyleLanes&, const double*, const double*, std::size_t);
void lvr_step(const LvrStep&, const LvrLanes&, const double*, std::size_t);
}  // namespace scalar

#if defined(PRIVSUB_HAVE_AVX2)
namespace avx2 {
void kyle_step_post(const KyleStep&, const KyleLanes&, const double*, const double*, std::size_t);
void kyle_step_pre(const KyleStep&, const KyleLanes&, const double*, const double*, std::size_t);
void lvr_step(const LvrStep&, const LvrLanes&, const double*, std::size_t);
}  // namespace avx2
#endif

}  // namespace privsub::kernels
