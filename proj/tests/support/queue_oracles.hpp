#pragma once

// Test-only reference implementations for the queueing analytics. These stay
// deliberately independent of the library's code paths: the DES below is a
// self-contained single-queue loop and the Erlang evaluation uses the raw
// factorial formula.

#include <cmath>
#include <cstdint>
#include <deque>
#include <queue>
#include <random>
#include <vector>

namespace oracle {

// Mean time-in-queue of an M/M/c FCFS queue measured by brute-force
// simulation of n_arrivals customers (plus a discarded warmup prefix).
inline double mmc_mean_wait_des(int c, double lambda, double mu,
                                std::uint64_t n_arrivals, std::uint64_t seed,
                                std::uint64_t warmup_arrivals = 0) {
  std::mt19937_64 gen(seed);
  auto expo = [&](double rate) {
    double u = (gen() >> 11) * 0x1.0p-53;
    return -std::log1p(-u) / rate;
  };

  // Server free times in a min-heap; an arrival waits for the earliest free
  // server when all are busy.
  std::priority_queue<double, std::vector<double>, std::greater<double>> free_at;
  for (int i = 0; i < c; ++i) free_at.push(0.0);

  double t = 0.0;
  double total_wait = 0.0;
  std::uint64_t counted = 0;
  std::uint64_t total = warmup_arrivals + n_arrivals;
  for (std::uint64_t i = 0; i < total; ++i) {
    t += expo(lambda);
    double soonest = free_at.top();
    free_at.pop();
    double start = std::max(t, soonest);
    if (i >= warmup_arrivals) {
      total_wait += start - t;
      ++counted;
    }
    free_at.push(start + expo(mu));
  }
  return counted ? total_wait / counted : 0.0;
}

inline double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// Erlang C straight from the textbook formula. Overflows around c ~ 170;
// fine as a reference for small c.
inline double erlang_c_naive(int c, double lambda, double mu) {
  double rho = lambda / (c * mu);
  double a = c * rho;
  double top = std::pow(a, c) / factorial(c) / (1.0 - rho);
  double sum = 0.0;
  for (int k = 0; k < c; ++k) sum += std::pow(a, k) / factorial(k);
  return top / (sum + top);
}

inline double wq_naive(int c, double lambda, double mu) {
  if (lambda == 0.0) return 0.0;
  return erlang_c_naive(c, lambda, mu) / (c * mu - lambda);
}

}  // namespace oracle
