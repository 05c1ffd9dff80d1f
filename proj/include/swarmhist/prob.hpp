#pragma once

// Closed-form detection probabilities for G(N, p) encounter sequences, a
// Monte Carlo estimator of the same event, and an exhaustive oracle for tiny
// instances.
//
// The event: within delta intervals robot R holds a report of robot R' if it
// met R' directly, or at some interval t met a robot that had met R' at an
// earlier interval s < t. The closed form assumes every vertex has exactly
// the expected degree N*p, so it is an approximation.

#include <cstddef>
#include <cstdint>

#include "swarmhist/chain.hpp"

namespace swarmhist {

struct ProbQuery {
  std::size_t n = 0;
  double p = 0.0;
  Interval delta = 1;
};

// Throws InvalidParameter unless n >= 2, 0 <= p <= 1 and delta >= 1.
void validate(const ProbQuery& q);

struct Estimate {
  double point = 0.0;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double std_error = 0.0;  // binomial: sqrt(point * (1 - point) / trials)
  std::uint64_t seed = 0;
};

// (1 - p)^((1 + (delta - 1) * n * p / 2) * delta)
double prob_no_report(const ProbQuery& q);
double prob_report_within(const ProbQuery& q);
// p^delta: a given pair meets in every one of delta intervals.
double prob_pair_meets_all(double p, Interval delta);

// Whether trial `trial` of a run seeded with `seed` produces a report of
// robot 2 at robot 1. Each trial draws from its own derived stream.
bool report_within_trial(const ProbQuery& q, std::uint64_t seed, std::uint64_t trial);

// OpenMP over trials. Bitwise identical to the serial version.
Estimate mc_report_within(const ProbQuery& q, std::size_t trials, std::uint64_t seed);
Estimate mc_report_within_serial(const ProbQuery& q, std::size_t trials, std::uint64_t seed);

inline constexpr std::size_t kMaxEnumerationSlots = 24;

// Exact probability by enumerating all 2^(C(n,2) * delta) edge patterns.
// Throws Infeasible beyond kMaxEnumerationSlots edge slots.
double exact_small_enumeration(const ProbQuery& q);

}  // namespace swarmhist
