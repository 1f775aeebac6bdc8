#include "npca/analytic.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace npca::analytic {

namespace {

void check_prob(double p, const char* what) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(what) + " must be in (0, 1]");
}

double collision_residual(double p, double tau, int n) {
  return p - (1.0 - std::pow(1.0 - tau, n - 1));
}

}  // namespace

double bianchi_tau(double p, int cw_min, int max_stage) {
  // (1 - (2p)^m) = (1 - 2p) * sum_{i<m} (2p)^i, so the (1 - 2p) factor cancels.
  double geometric = 0.0;
  double term = 1.0;
  for (int i = 0; i < max_stage; ++i) {
    geometric += term;
    term *= 2.0 * p;
  }
  const double w = cw_min;
  return 2.0 / ((w + 1.0) + p * w * geometric);
}

BianchiSolution solve_bianchi(int n, int cw_min, int max_stage) {
  if (n < 1) throw std::invalid_argument("solve_bianchi: n must be >= 1");
  if (cw_min < 2) throw std::invalid_argument("solve_bianchi: cw_min must be >= 2");
  if (max_stage < 0) throw std::invalid_argument("solve_bianchi: max_stage must be >= 0");

  BianchiSolution sol;
  sol.n_stations = n;
  if (n == 1) {
    sol.tau = bianchi_tau(0.0, cw_min, max_stage);
    return sol;
  }

  // g(p) = p - (1 - (1 - tau(p))^(n-1)) is increasing on [0, 1]; g(0) < 0 < g(1).
  double lo = 0.0;
  double hi = 1.0;
  auto g = [&](double p) { return collision_residual(p, bianchi_tau(p, cw_min, max_stage), n); };
  if (!(g(lo) <= 0.0 && g(hi) > 0.0)) throw std::runtime_error("solve_bianchi: root not bracketed");

  constexpr int kMaxIterations = 200;
  int it = 0;
  for (; it < kMaxIterations && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (g(mid) <= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double p = std::fabs(g(lo)) <= std::fabs(g(hi)) ? lo : hi;
  sol.p_cond = p;
  sol.tau = bianchi_tau(p, cw_min, max_stage);
  sol.residual = std::fabs(collision_residual(p, sol.tau, n));
  sol.iterations = it;
  if (sol.residual > 1e-10) throw std::runtime_error("solve_bianchi: did not converge");
  return sol;
}

BianchiSolution solve_bianchi(int n, const PhyMacConfig& cfg) {
  return solve_bianchi(n, cfg.cw_min(), cfg.max_backoff_stage());
}

double p_transmit(double tau, int n) {
  if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("p_transmit: tau must be in [0, 1]");
  if (n < 1) throw std::invalid_argument("p_transmit: n must be >= 1");
  return 1.0 - std::pow(1.0 - tau, n);
}

double p_success(double tau, int n) {
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("p_success: tau must be in (0, 1]");
  return n * tau * std::pow(1.0 - tau, n - 1) / p_transmit(tau, n);
}

SingleChannelResult single_channel(int n, const PhyMacConfig& cfg) {
  SingleChannelResult r;
  r.bianchi = solve_bianchi(n, cfg);
  r.p_tr = p_transmit(r.bianchi.tau, n);
  r.p_s = p_success(r.bianchi.tau, n);
  const double ts = t_success_us(cfg);
  const double tc = t_collision_us(cfg);
  r.expected_slot_us = (1.0 - r.p_tr) * cfg.slot_us() + r.p_tr * r.p_s * ts +
                       r.p_tr * (1.0 - r.p_s) * tc;
  const double success_rate = r.p_s * r.p_tr / r.expected_slot_us;  // per microsecond
  r.mbps = success_rate * cfg.payload_bits();
  r.normalized = success_rate * payload_airtime_us(cfg.payload_bytes(), cfg.data_rate_mbps());
  return r;
}

double single_channel_throughput(int n, const PhyMacConfig& cfg) { return single_channel(n, cfg).mbps; }

double f_coeff(int m, std::span<const double> idle_probs) {
  const int n = static_cast<int>(idle_probs.size());
  if (m < 1 || m > n + 1) throw std::out_of_range("f_coeff: m must be in [1, N+1]");
  double sum = 1.0;
  double prod = 1.0;
  for (int i = m; i <= n; ++i) {
    prod *= idle_probs[static_cast<std::size_t>(i - 1)];
    sum += prod;
  }
  return sum;
}

double legacy_from_single(double s, std::span<const double> idle_probs) {
  for (double p : idle_probs) check_prob(p, "non-primary idle probability");
  return s * f_coeff(1, idle_probs);
}

ThroughputBreakdown npca_from_single(double s, double primary_idle_prob,
                                     std::span<const double> idle_probs) {
  check_prob(primary_idle_prob, "primary idle probability");
  for (double p : idle_probs) check_prob(p, "non-primary idle probability");

  const int n = static_cast<int>(idle_probs.size());
  ThroughputBreakdown b;
  b.s_single = s;
  for (int m = 1; m <= n + 1; ++m) b.f_coeffs.push_back(f_coeff(m, idle_probs));
  b.s_legacy = s * b.f_coeffs[0];

  b.per_channel_npca.push_back(b.s_legacy);
  // Channel c is reached when the primary and channels 1..c-1 are busy.
  double reach = s * (1.0 - primary_idle_prob) / primary_idle_prob;
  for (int c = 1; c <= n; ++c) {
    const double pc = idle_probs[static_cast<std::size_t>(c - 1)];
    b.per_channel_npca.push_back(reach * pc * b.f_coeffs[static_cast<std::size_t>(c)]);
    reach *= (1.0 - pc) / pc;
  }
  b.s_npca = 0.0;
  for (double v : b.per_channel_npca) b.s_npca += v;
  return b;
}

double npca_closed_form_literal(double s, double primary_idle_prob, std::span<const double> idle_probs) {
  check_prob(primary_idle_prob, "primary idle probability");
  const int n = static_cast<int>(idle_probs.size());
  double inner = 0.0;
  for (int t = 1; t <= n; ++t)
    inner += idle_probs[static_cast<std::size_t>(t - 1)] * (f_coeff(t, idle_probs) - 1.0);
  return s * (f_coeff(1, idle_probs) + (1.0 - primary_idle_prob) / primary_idle_prob * inner);
}

double legacy_throughput(int n, const PhyMacConfig& cfg, const ChannelSetup& channels) {
  channels.validate();
  return legacy_from_single(single_channel_throughput(n, cfg), channels.nonprimary_idle_probs);
}

ThroughputBreakdown npca_throughput(int n, const PhyMacConfig& cfg, const ChannelSetup& channels) {
  channels.validate();
  return npca_from_single(single_channel_throughput(n, cfg), channels.primary_idle_prob,
                          channels.nonprimary_idle_probs);
}

DelayEstimate access_delay(int n, const PhyMacConfig& cfg) {
  const BianchiSolution sol = solve_bianchi(n, cfg);
  const double tau = sol.tau;
  const double ptr = p_transmit(tau, n);
  if (tau >= 1.0 || ptr >= 1.0) throw std::domain_error("access_delay: singular (tau or P_tr is 1)");

  const double pkt = payload_airtime_us(cfg.payload_bytes(), cfg.data_rate_mbps());
  const double own_tx = pkt + cfg.difs_us();                                   // T
  const double occupancy = pkt + cfg.sifs_us() + cfg.ack_us() + cfg.difs_us();  // C = T* = C*
  const double other_success = occupancy;
  const double other_collision = occupancy;

  DelayEstimate d;
  d.components[0] = (cfg.slot_us() + ptr * other_collision) / (tau * (1.0 - ptr));
  d.components[1] = (n - 1) * (other_success - other_collision) / (1.0 - tau);
  d.components[2] = ptr * occupancy / (1.0 - ptr);
  d.components[3] = own_tx;
  d.expected_access_delay_us = d.components[0] + d.components[1] + d.components[2] + d.components[3];
  return d;
}

}  // namespace npca::analytic
