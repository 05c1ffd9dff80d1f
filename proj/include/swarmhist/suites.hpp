#pragma once

// Seeded multi-run scenario experiments. Each run is an independent
// simulation with its own derived seed, so runs can execute in any order;
// the OpenMP and serial paths produce identical results.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "swarmhist/chain.hpp"

namespace swarmhist {

enum class Execution { serial, parallel };

// Refuse-record adversaries trying to make honest robots look disappeared.
// A robot is marked when detect_disappeared lists it on the swarm-wide view
// built from every robot's head at interval `intervals`.
struct FramingParams {
  std::size_t n = 25;
  double p = 0.33;
  Interval delta = 3;
  double alpha = 0.0;      // floor(alpha * n) refuse_record robots per run, chosen at random
  Interval intervals = 0;  // 0: use delta
  std::size_t runs = 1000;
  std::uint64_t seed = 0;
  // Also run detect_disappeared on every honest robot's own local view.
  bool observer_views = false;
};

struct FramingRun {
  std::size_t adversaries = 0;
  std::size_t honest_framed = 0;       // honest robots marked on the swarm-wide view
  std::size_t observations = 0;        // (honest observer, honest subject) pairs, observer_views only
  std::size_t observer_marks = 0;      // of those, marked disappeared
};

struct FramingResult {
  std::size_t runs = 0;
  std::size_t adversaries_per_run = 0;
  std::size_t honest_framed = 0;
  std::size_t runs_with_framing = 0;
  std::size_t observations = 0;
  std::size_t observer_marks = 0;
};

FramingRun framing_run(const FramingParams& params, std::size_t run);
FramingResult run_framing_suite(const FramingParams& params, Execution exec = Execution::parallel);

// One colluding pair fabricating co-meetings every interval; flags are
// computed on the central view of the last delta intervals.
struct CollusionParams {
  std::size_t n = 25;
  double p = 0.33;
  Interval delta = 3;
  double epsilon = 0.05;
  std::size_t runs = 1000;
  std::uint64_t seed = 0;
};

struct CollusionRun {
  bool colluders_flagged = false;
  std::size_t honest_pairs = 0;
  std::size_t honest_flagged = 0;
};

struct CollusionResult {
  std::size_t runs = 0;
  std::size_t colluders_flagged = 0;
  std::size_t honest_pairs = 0;
  std::size_t honest_flagged = 0;
  double honest_rate = 0.0;
  double expected_rate = 0.0;  // p^delta
  double std_error = 0.0;      // binomial, under the expected rate

  bool rate_consistent(double sigmas = 3.0) const;
};

CollusionRun collusion_run(const CollusionParams& params, std::size_t run);
CollusionResult run_collusion_suite(const CollusionParams& params, Execution exec = Execution::parallel);

}  // namespace swarmhist
