#include <immintrin.h>

#include <algorithm>
#include <cfloat>
#include <cmath>

#include "privsub/kernels.hpp"

namespace privsub::kernels::avx2 {

#include "kyle_lane.inl"

namespace {

inline __m256d abs_pd(__m256d x) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x); }

template <bool PostClearing>
void kyle_step_impl(const KyleStep& s, const KyleLanes& l, const double* z_u, const double* z_eps,
                    std::size_t n) {
  const __m256d beta_dt = _mm256_set1_pd(s.beta_dt);
  const __m256d noise_sd = _mm256_set1_pd(s.noise_sd);
  const __m256d privacy_sd = _mm256_set1_pd(s.privacy_sd);
  const __m256d lambda = _mm256_set1_pd(s.lambda);
  const __m256d gain = _mm256_set1_pd(s.gain);
  const __m256d tiny = _mm256_set1_pd(DBL_MIN);

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(l.v + i);
    const __m256d p = _mm256_loadu_pd(l.p + i);
    const __m256d m = _mm256_loadu_pd(l.m + i);

    const __m256d dx = _mm256_mul_pd(beta_dt, _mm256_sub_pd(v, p));
    const __m256d du = _mm256_mul_pd(noise_sd, _mm256_loadu_pd(z_u + i));
    const __m256d de = _mm256_mul_pd(privacy_sd, _mm256_loadu_pd(z_eps + i));
    const __m256d dy = _mm256_add_pd(dx, du);
    const __m256d dyo = _mm256_add_pd(dy, de);
    const __m256d p_new = _mm256_add_pd(p, _mm256_mul_pd(lambda, dyo));
    const __m256d p_settle = PostClearing ? p_new : p;

    const __m256d wedge = _mm256_sub_pd(v, p_settle);
    const __m256d neg_wedge = _mm256_xor_pd(wedge, _mm256_set1_pd(-0.0));
    const __m256d prof_I = _mm256_add_pd(_mm256_loadu_pd(l.profit_I + i), _mm256_mul_pd(wedge, dx));
    const __m256d prof_N = _mm256_add_pd(_mm256_loadu_pd(l.profit_N + i), _mm256_mul_pd(wedge, du));
    const __m256d prof_M = _mm256_add_pd(_mm256_loadu_pd(l.profit_M + i), _mm256_mul_pd(neg_wedge, dy));
    _mm256_storeu_pd(l.profit_I + i, prof_I);
    _mm256_storeu_pd(l.profit_N + i, prof_N);
    _mm256_storeu_pd(l.profit_M + i, prof_M);

    const __m256d ady = abs_pd(dy);
    const __m256d adx = abs_pd(dx);
    const __m256d adu = abs_pd(du);
    _mm256_storeu_pd(l.volume + i, _mm256_add_pd(_mm256_loadu_pd(l.volume + i), ady));
    const __m256d scale = _mm256_div_pd(ady, _mm256_max_pd(_mm256_add_pd(adx, adu), tiny));
    _mm256_storeu_pd(l.fee_base_I + i, _mm256_add_pd(_mm256_loadu_pd(l.fee_base_I + i), _mm256_mul_pd(scale, adx)));
    _mm256_storeu_pd(l.fee_base_N + i, _mm256_add_pd(_mm256_loadu_pd(l.fee_base_N + i), _mm256_mul_pd(scale, adu)));

    const __m256d innovation = _mm256_add_pd(dyo, _mm256_mul_pd(beta_dt, _mm256_sub_pd(p, m)));
    const __m256d m_new = _mm256_add_pd(m, _mm256_mul_pd(gain, innovation));
    _mm256_storeu_pd(l.p + i, p_new);
    _mm256_storeu_pd(l.m + i, m_new);

    const __m256d zero_sum = abs_pd(_mm256_add_pd(_mm256_add_pd(prof_I, prof_N), prof_M));
    _mm256_storeu_pd(l.zero_sum_max + i, _mm256_max_pd(_mm256_loadu_pd(l.zero_sum_max + i), zero_sum));
    const __m256d mean_gap = abs_pd(_mm256_sub_pd(p_new, m_new));
    _mm256_storeu_pd(l.mean_gap_max + i, _mm256_max_pd(_mm256_loadu_pd(l.mean_gap_max + i), mean_gap));

    _mm256_storeu_pd(l.dx + i, dx);
    _mm256_storeu_pd(l.du + i, du);
    _mm256_storeu_pd(l.deps + i, de);
    _mm256_storeu_pd(l.dy_obs + i, dyo);
  }
  for (; i < n; ++i) kyle_lane<PostClearing>(s, l, z_u[i], z_eps[i], i);
}

}  // namespace

void kyle_step_post(const KyleStep& s, const KyleLanes& l, const double* z_u, const double* z_eps,
                    std::size_t n) {
  kyle_step_impl<true>(s, l, z_u, z_eps, n);
}

void kyle_step_pre(const KyleStep& s, const KyleLanes& l, const double* z_u, const double* z_eps,
                   std::size_t n) {
  kyle_step_impl<false>(s, l, z_u, z_eps, n);
}

void lvr_step(const LvrStep& s, const LvrLanes& l, const double* growth, std::size_t n) {
  const __m256d sqrt_k = _mm256_set1_pd(s.sqrt_k);
  const __m256d rate_dt = _mm256_set1_pd(s.rate_dt);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d sq_old = _mm256_loadu_pd(l.sqrt_q + i);
    const __m256d q_new = _mm256_mul_pd(_mm256_loadu_pd(l.q + i), _mm256_loadu_pd(growth + i));
    const __m256d sq_new = _mm256_sqrt_pd(q_new);
    const __m256d d = _mm256_sub_pd(sq_new, sq_old);
    const __m256d step = _mm256_mul_pd(sqrt_k, _mm256_div_pd(_mm256_mul_pd(d, d), sq_old));
    _mm256_storeu_pd(l.integral + i, _mm256_add_pd(_mm256_loadu_pd(l.integral + i), _mm256_mul_pd(rate_dt, sq_old)));
    _mm256_storeu_pd(l.lvr + i, _mm256_add_pd(_mm256_loadu_pd(l.lvr + i), step));
    _mm256_storeu_pd(l.min_step + i, _mm256_min_pd(_mm256_loadu_pd(l.min_step + i), step));
    _mm256_storeu_pd(l.step + i, step);
    _mm256_storeu_pd(l.q + i, q_new);
    _mm256_storeu_pd(l.sqrt_q + i, sq_new);
  }
  for (; i < n; ++i) lvr_lane(s, l, growth[i], i);
}

}  // namespace privsub::kernels::avx2
