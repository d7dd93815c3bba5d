#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include "swanmech/types.hpp"

namespace swanmech {

// Generalization error of the model trained by the participants in `state`:
//   eps = (d*gamma^2 / K^2) * sum_i K_i/D_i + ((K-1)/K) * sigma^2.
// Returns nullopt when K = 0 (no model exists).
inline std::optional<double> generalization_error(const SocialState& state,
                                                  const Scenario& s) {
  const std::int64_t k = state.total_participants();
  if (k == 0) return std::nullopt;
  double weighted = 0.0;
  for (int i = 0; i < s.type_count(); ++i)
    weighted += static_cast<double>(state.participants[i]) /
                static_cast<double>(s.types[i].data_size);
  const double kd = static_cast<double>(k);
  return s.params.dg2() * weighted / (kd * kd) +
         (kd - 1.0) / kd * s.params.client_variance;
}

// d(eps)/dK_i on the continuous relaxation:
//   d*gamma^2 * (K/D_i - 2S) / K^3 + sigma^2 / K^2,  S = sum_j K_j/D_j.
inline double error_partial(const SocialState& state, const Scenario& s, int i) {
  const std::int64_t k = state.total_participants();
  if (k == 0) throw ScenarioError("error_partial undefined at K = 0");
  double weighted = 0.0;
  for (int j = 0; j < s.type_count(); ++j)
    weighted += static_cast<double>(state.participants[j]) /
                static_cast<double>(s.types[j].data_size);
  const double kd = static_cast<double>(k);
  const double di = static_cast<double>(s.types[i].data_size);
  return s.params.dg2() * (kd / di - 2.0 * weighted) / (kd * kd * kd) +
         s.params.client_variance / (kd * kd);
}

// Data-size threshold of Theorem-style participation effects: a newcomer with
// 1/D <= eta brings non-negative network effects.
//   eta = (2K+1) * sum_i K_i/D_i / K^2 - (K+1) * sigma^2 / (d*gamma^2*K).
inline double eta_threshold(const SocialState& state, const Scenario& s) {
  const std::int64_t k = state.total_participants();
  if (k == 0) throw ScenarioError("eta_threshold undefined at K = 0");
  double weighted = 0.0;
  for (int i = 0; i < s.type_count(); ++i)
    weighted += static_cast<double>(state.participants[i]) /
                static_cast<double>(s.types[i].data_size);
  const double kd = static_cast<double>(k);
  return (2.0 * kd + 1.0) * weighted / (kd * kd) -
         (kd + 1.0) * s.params.client_variance / (s.params.dg2() * kd);
}

// eps(K) - eps(K + newcomer of the given type); positive means the newcomer
// improves the model.
inline double network_effect(const SocialState& state, const Scenario& s,
                             int newcomer_type) {
  const std::int64_t k = state.total_participants();
  if (k == 0) throw ScenarioError("network_effect undefined at K = 0");
  if (state.participants[newcomer_type] + state.buyers[newcomer_type] >=
      s.types[newcomer_type].population)
    throw ScenarioError("no headroom for a newcomer of this type");
  SocialState joined = state;
  ++joined.participants[newcomer_type];
  return *generalization_error(state, s) - *generalization_error(joined, s);
}

// Region of type-j participation effects at the given coalition. Boundary
// equalities resolve toward the non-negative-effect region: II over I and
// III, I over III.
inline RegionReport classify_region(const SocialState& state, const Scenario& s,
                                    int j) {
  RegionReport r;
  r.type_index = j;
  r.eta = eta_threshold(state, s);
  r.inv_d = 1.0 / static_cast<double>(s.types[j].data_size);
  r.hetero_point = s.params.client_variance / s.params.dg2();
  if (r.inv_d <= r.eta + kBoundaryTol) {
    // Non-negative effect at the current coalition.
    r.region = (r.inv_d < r.hetero_point - kBoundaryTol) ? Region::I : Region::II;
  } else {
    r.region = (r.inv_d <= r.hetero_point + kBoundaryTol) ? Region::III : Region::IV;
  }
  return r;
}

namespace detail {

// Harmonic mean of member data sizes of a participant coalition, K / (sum K_i/D_i).
inline double harmonic_mean(const SocialState& state, const Scenario& s) {
  double weighted = 0.0;
  for (int i = 0; i < s.type_count(); ++i)
    weighted += static_cast<double>(state.participants[i]) /
                static_cast<double>(s.types[i].data_size);
  return static_cast<double>(state.total_participants()) / weighted;
}

} // namespace detail

// Whether merging two disjoint coalitions trains a model with lower error than
// either achieves alone: sigma^2/gamma^2 < [H_b K_b + K_a (2 H_b - H_a)] /
// [H_a H_b (K_a + K_b) / d], labelled so that H_a <= H_b.
inline bool coalition_merge_beneficial(const SocialState& a, const SocialState& b,
                                       const Scenario& s) {
  const std::int64_t ka = a.total_participants();
  const std::int64_t kb = b.total_participants();
  if (ka == 0 || kb == 0) throw ScenarioError("coalitions must be non-empty");
  for (int i = 0; i < s.type_count(); ++i)
    if (a.participants[i] + b.participants[i] > s.types[i].population)
      throw ScenarioError("merged coalition exceeds type population");
  double ha = detail::harmonic_mean(a, s);
  double hb = detail::harmonic_mean(b, s);
  double kad = static_cast<double>(ka);
  double kbd = static_cast<double>(kb);
  if (ha > hb) {
    std::swap(ha, hb);
    std::swap(kad, kbd);
  }
  const double rhs = (hb * kbd + kad * (2.0 * hb - ha)) /
                     (ha * hb * (kad + kbd) / static_cast<double>(s.params.feature_dim));
  return s.params.client_variance / s.params.data_variance < rhs;
}

namespace detail {

// Exact sign of eps(k1 + 1) - eps(k1) for the two-type iid case; eps is
// proportional to (k1*D2 + K2*D1) / (k1 + K2)^2.
inline bool ex1_step_decreases(std::int64_t k1, std::int64_t d1, std::int64_t d2,
                               std::int64_t k2) {
  const __int128 num_next = static_cast<__int128>(k1 + 1) * d2 + static_cast<__int128>(k2) * d1;
  const __int128 num_cur = static_cast<__int128>(k1) * d2 + static_cast<__int128>(k2) * d1;
  const __int128 den_next = static_cast<__int128>(k1 + 1 + k2) * (k1 + 1 + k2);
  const __int128 den_cur = static_cast<__int128>(k1 + k2) * (k1 + k2);
  return num_next * den_cur < num_cur * den_next;
}

} // namespace detail

// Two-type iid case: smallest K1 from which eps(K1) strictly decreases,
//   ceil((-2 K2 D1 - D2 + sqrt(4 K2^2 (D2-D1)^2 + D2^2)) / (2 D2)),
// clamped at 0. When the quadratic root is exactly an integer the step there
// is flat, so the threshold moves to the next integer (verified exactly).
inline std::int64_t example1_threshold(std::int64_t d1, std::int64_t d2,
                                       std::int64_t k2) {
  if (d1 < 1 || d2 < d1 || k2 < 1) throw ScenarioError("example1: need 1 <= D1 <= D2, K2 >= 1");
  const double d1d = static_cast<double>(d1);
  const double d2d = static_cast<double>(d2);
  const double k2d = static_cast<double>(k2);
  const double root = std::sqrt(4.0 * k2d * k2d * (d2d - d1d) * (d2d - d1d) + d2d * d2d);
  const double x = (-2.0 * k2d * d1d - d2d + root) / (2.0 * d2d);
  std::int64_t t = static_cast<std::int64_t>(std::ceil(x - 1e-9));
  if (t < 0) t = 0;
  while (!detail::ex1_step_decreases(t, d1, d2, k2)) ++t;
  return t;
}

} // namespace swanmech
