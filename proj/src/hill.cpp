#include "hilltail/hill.hpp"

#include <cmath>
#include <random>

#include "hilltail/error.hpp"
#include "hilltail/format.hpp"
#include "hilltail/rng.hpp"

namespace hilltail {

namespace {

std::size_t usable_count(const SortedSample& sample) {
  const std::size_t m = sample.positive_count();
  require(m >= 2, ErrorCode::insufficient_positive_data,
          "need at least 2 positive values, got " + std::to_string(m));
  return m;
}

}  // namespace

HillTrace hill_trace(const SortedSample& sample) {
  const std::size_t m = usable_count(sample);
  const auto& x = sample.values;
  HillTrace trace;
  trace.n = m;
  trace.sample_size = sample.size();
  trace.gammas.resize(m - 1);

  double log_prev = std::log(x[0]);
  double running = 0.0;
  for (std::size_t k = 1; k < m; ++k) {
    const double log_next = std::log(x[k]);
    running += static_cast<double>(k) * (log_prev - log_next);
    trace.gammas[k - 1] = running / static_cast<double>(k);
    log_prev = log_next;
  }
  return trace;
}

HillTrace hill_trace_reference(const SortedSample& sample) {
  const std::size_t m = usable_count(sample);
  const auto& x = sample.values;
  HillTrace trace;
  trace.n = m;
  trace.sample_size = sample.size();
  trace.gammas.resize(m - 1);
  for (std::size_t k = 1; k < m; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += std::log(x[i] / x[k]);
    trace.gammas[k - 1] = sum / static_cast<double>(k);
  }
  return trace;
}

RepresentationDraw simulate_representation(double gamma, const VonMises& eta, std::size_t n,
                                           std::size_t k_max, std::uint64_t seed) {
  require(gamma > 0.0, ErrorCode::invalid_argument, "gamma must be positive");
  require(n >= 2 && k_max >= 1 && k_max < n, ErrorCode::invalid_argument,
          "representation needs 1 <= k_max < n");
  Engine engine = make_engine(seed);
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> e(n);
  for (auto& v : e) v = expo(engine);

  // Renyi: Y_(i) = sum_{j>=i} E_j / j, so i (Y_(i) - Y_(i+1)) = E_i.
  RepresentationDraw draw;
  draw.y.assign(n, 0.0);
  double tail = 0.0;
  for (std::size_t i = n; i >= 1; --i) {
    tail += e[i - 1] / static_cast<double>(i);
    draw.y[i - 1] = tail;
  }

  HillTrace& trace = draw.trace;
  trace.n = n;
  trace.sample_size = n;
  trace.gammas.resize(k_max);
  double running = 0.0;
  for (std::size_t i = 1; i <= k_max; ++i) {
    const double lo = draw.y[i];  // Y_(i+1)
    const double hi = draw.y[i - 1];
    // int_0^{E_i} eta(e^{u/i + lo}) du = i * int_lo^hi eta(e^y) dy
    running += gamma * e[i - 1] + static_cast<double>(i) * eta.integrate_log(lo, hi);
    trace.gammas[i - 1] = running / static_cast<double>(i);
  }
  return draw;
}

HillTrace hill_from_representation(double gamma, const VonMises& eta, std::size_t n,
                                   std::size_t k_max, std::uint64_t seed) {
  return simulate_representation(gamma, eta, n, k_max, seed).trace;
}

void write_trace_csv(std::ostream& out, const HillTrace& trace) {
  out << "k,gamma_hat\n";
  for (std::size_t k = 1; k <= trace.size(); ++k) {
    out << k << ',' << format_double(trace[k]) << '\n';
  }
}

}  // namespace hilltail
