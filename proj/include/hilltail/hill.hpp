#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "hilltail/distributions.hpp"

namespace hilltail {

// Hill estimates gamma_hat(k), k = 1..size(), from the positive order
// statistics of one sample.
struct HillTrace {
  std::vector<double> gammas;   // gammas[k - 1] = gamma_hat(k)
  std::size_t n = 0;            // number of order statistics the trace was built from
  std::size_t sample_size = 0;  // full sample size, used for threshold sequences

  std::size_t size() const noexcept { return gammas.size(); }
  double at(std::size_t k) const { return gammas.at(k - 1); }
  double operator[](std::size_t k) const noexcept { return gammas[k - 1]; }
};

// O(n) spacing recursion S_k = S_{k-1} + k ln(X_(k) / X_(k+1)),
// gamma_hat(k) = S_k / k, over the positive prefix of the sample.
// Throws insufficient-positive-data with fewer than two positive values.
HillTrace hill_trace(const SortedSample& sample);

// Direct O(n k) definition (1/k) sum_{i<=k} ln(X_(i) / X_(k+1)). Serial
// reference for hill_trace.
HillTrace hill_trace_reference(const SortedSample& sample);

// One draw of the exponential representation: the trace up to k_max and the
// exponential order statistics Y_(1) >= ... >= Y_(n) it was built from
// (y[i - 1] = Y_(i)).
struct RepresentationDraw {
  HillTrace trace;
  std::vector<double> y;
};

// Simulates Hill estimators as functionals of independent exponentials:
// gamma_hat(k) = (1/k) sum_{i<=k} int_0^{E_i} (gamma + eta(e^{u/i + Y_(i+1)})) du.
RepresentationDraw simulate_representation(double gamma, const VonMises& eta, std::size_t n,
                                           std::size_t k_max, std::uint64_t seed);

HillTrace hill_from_representation(double gamma, const VonMises& eta, std::size_t n,
                                   std::size_t k_max, std::uint64_t seed);

// CSV with header "k,gamma_hat", one row per k, LF line endings.
void write_trace_csv(std::ostream& out, const HillTrace& trace);

}  // namespace hilltail
