// Single-lane reference update shared by the scalar kernels and the AVX2 tails.
// Included inside a namespace; expects <algorithm>, <cfloat>, <cmath>.

template <bool PostClearing>
inline void kyle_lane(const KyleStep& s, const KyleLanes& l, double zu, double ze, std::size_t i) {
  const double v = l.v[i];
  const double p = l.p[i];
  const double m = l.m[i];

  const double dx = s.beta_dt * (v - p);
  const double du = s.noise_sd * zu;
  const double de = s.privacy_sd * ze;
  const double dy = dx + du;
  const double dyo = dy + de;
  const double p_new = p + s.lambda * dyo;
  const double p_settle = PostClearing ? p_new : p;

  const double wedge = v - p_settle;
  const double prof_I = l.profit_I[i] + wedge * dx;
  const double prof_N = l.profit_N[i] + wedge * du;
  const double prof_M = l.profit_M[i] + (-wedge) * dy;
  l.profit_I[i] = prof_I;
  l.profit_N[i] = prof_N;
  l.profit_M[i] = prof_M;

  const double ady = std::fabs(dy);
  const double adx = std::fabs(dx);
  const double adu = std::fabs(du);
  l.volume[i] += ady;
  const double scale = ady / std::max(adx + adu, DBL_MIN);
  l.fee_base_I[i] += scale * adx;
  l.fee_base_N[i] += scale * adu;

  const double m_new = m + s.gain * (dyo + s.beta_dt * (p - m));
  l.p[i] = p_new;
  l.m[i] = m_new;

  l.zero_sum_max[i] = std::max(l.zero_sum_max[i], std::fabs(prof_I + prof_N + prof_M));
  l.mean_gap_max[i] = std::max(l.mean_gap_max[i], std::fabs(p_new - m_new));

  l.dx[i] = dx;
  l.du[i] = du;
  l.deps[i] = de;
  l.dy_obs[i] = dyo;
}

inline void lvr_lane(const LvrStep& s, const LvrLanes& l, double growth, std::size_t i) {
  const double sq_old = l.sqrt_q[i];
  const double q_new = l.q[i] * growth;
  const double sq_new = std::sqrt(q_new);
  const double d = sq_new - sq_old;
  const double step = s.sqrt_k * (d * d / sq_old);
  l.integral[i] += s.rate_dt * sq_old;
  l.lvr[i] += step;
  l.min_step[i] = std::min(l.min_step[i], step);
  l.step[i] = step;
  l.q[i] = q_new;
  l.sqrt_q[i] = sq_new;
}
