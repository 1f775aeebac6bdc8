// Closed-form saturation throughput and access-delay models for legacy
// (primary-anchored bonding) and non-primary channel access.
#pragma once

#include <span>
#include <vector>

#include "npca/params.hpp"

namespace npca::analytic {

/// Fixed point of the saturated DCF backoff chain for n contenders.
struct BianchiSolution {
  double tau = 0;       ///< per-slot transmit probability of a station
  double p_cond = 0;    ///< conditional collision probability
  int n_stations = 0;
  double residual = 0;  ///< |p - (1 - (1 - tau)^(n-1))| at the returned point
  int iterations = 0;
};

/// Transmit probability for a given conditional collision probability,
/// tau(p) = 2(1-2p) / [(1-2p)(W+1) + pW(1-(2p)^m)], evaluated in the
/// factored form that has no removable singularity at p = 1/2.
double bianchi_tau(double p_cond, int cw_min, int max_stage);

BianchiSolution solve_bianchi(int n, int cw_min, int max_stage);
BianchiSolution solve_bianchi(int n, const PhyMacConfig& cfg);

/// Probability that at least one of n stations transmits in a slot.
double p_transmit(double tau, int n);
/// Probability that a slot carrying a transmission carries exactly one.
double p_success(double tau, int n);

struct SingleChannelResult {
  BianchiSolution bianchi;
  double p_tr = 0;
  double p_s = 0;
  double expected_slot_us = 0;  ///< denominator of the renewal-reward ratio
  double mbps = 0;              ///< payload bits per microsecond
  double normalized = 0;        ///< fraction of time carrying payload
};

SingleChannelResult single_channel(int n, const PhyMacConfig& cfg);
/// Saturation throughput of n stations on one channel, in Mbps.
double single_channel_throughput(int n, const PhyMacConfig& cfg);

/// F(m) = 1 + sum_{i=m..N} prod_{j=m..i} P_j with 1-based m in [1, N+1].
double f_coeff(int m, std::span<const double> idle_probs);

struct ThroughputBreakdown {
  double s_single = 0;
  double s_legacy = 0;
  double s_npca = 0;
  std::vector<double> per_channel_npca;  ///< [S_pr, S_1 .. S_N]
  std::vector<double> f_coeffs;          ///< [F(1) .. F(N+1)]
};

/// Legacy multi-channel throughput S * F(1) from a given single-channel S.
double legacy_from_single(double s, std::span<const double> idle_probs);
/// NPCA cascade from a given single-channel S; `s_single` in the result is `s`.
ThroughputBreakdown npca_from_single(double s, double primary_idle_prob,
                                     std::span<const double> idle_probs);
/// The printed single-line NPCA closed form, expanded literally. Kept for
/// comparison only; it does not equal the per-channel sum (see README).
double npca_closed_form_literal(double s, double primary_idle_prob,
                                std::span<const double> idle_probs);

double legacy_throughput(int n, const PhyMacConfig& cfg, const ChannelSetup& channels);
ThroughputBreakdown npca_throughput(int n, const PhyMacConfig& cfg, const ChannelSetup& channels);

struct DelayEstimate {
  double expected_access_delay_us = 0;
  /// idle/backoff term, other-station term, collision term, own-tx term
  double components[4] = {0, 0, 0, 0};
  /// Always true: T* and C* are equal, so the second term vanishes.
  bool other_station_term_zero = true;
  /// The approximation assumes cw_max is large relative to cw_min.
  bool assumes_large_cw_max = true;
};

DelayEstimate access_delay(int n, const PhyMacConfig& cfg);

}  // namespace npca::analytic
