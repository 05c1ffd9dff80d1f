#include "swarmhist/suites.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "swarmhist/detect.hpp"
#include "swarmhist/error.hpp"
#include "swarmhist/prob.hpp"
#include "swarmhist/rng.hpp"
#include "swarmhist/sim.hpp"

namespace swarmhist {

namespace {

constexpr std::uint64_t kPickStream = 11;

// k distinct robot ids drawn uniformly (partial Fisher-Yates).
std::vector<RobotId> pick_robots(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<RobotId> ids(n);
  std::iota(ids.begin(), ids.end(), RobotId{1});
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.next() % (n - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(k);
  std::sort(ids.begin(), ids.end());
  return ids;
}

template <typename Run, typename Kernel>
std::vector<Run> run_all(std::size_t runs, Execution exec, Kernel kernel) {
  std::vector<Run> out(runs);
  if (exec == Execution::parallel) {
    const auto count = static_cast<std::int64_t>(runs);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = kernel(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < runs; ++i) out[i] = kernel(i);
  }
  return out;
}

}  // namespace

FramingRun framing_run(const FramingParams& params, std::size_t run) {
  SimConfig config;
  config.n = params.n;
  config.p = params.p;
  config.delta = params.delta;
  config.intervals = params.intervals == 0 ? params.delta : params.intervals;
  config.alpha = params.alpha;
  config.seed = derive_seed(params.seed, {kRunStream, run});
  const auto k = static_cast<std::size_t>(std::floor(params.alpha * static_cast<double>(params.n) + 1e-9));
  const auto bad = pick_robots(params.n, k, derive_seed(params.seed, {kPickStream, run}));
  if (!bad.empty()) config.adversaries.push_back({bad, Behavior::refuse_record, 0, 0, 0});

  const SimTrace trace = run_simulation(config);
  const Verifier verifier(trace.central_key, trace.store);
  const std::set<RobotId> adversaries(bad.begin(), bad.end());

  FramingRun out;
  out.adversaries = bad.size();
  const LocalView swarm = build_central_view(trace.heads, trace.credentials, config.intervals, config.delta, verifier);
  for (const auto& s : detect_disappeared(swarm, config.delta)) {
    if (!adversaries.contains(s.robot)) ++out.honest_framed;
  }
  if (!params.observer_views) return out;
  for (RobotId obs = 1; obs <= config.n; ++obs) {
    if (adversaries.contains(obs)) continue;
    const LinkPtr head = trace.store.get(trace.heads.at(obs));
    const LocalView view = build_local_view(*head, trace.credentials[obs - 1], config.n, config.delta, verifier);
    out.observations += config.n - adversaries.size() - 1;
    for (const auto& s : detect_disappeared(view, config.delta)) {
      if (!adversaries.contains(s.robot)) ++out.observer_marks;
    }
  }
  return out;
}

FramingResult run_framing_suite(const FramingParams& params, Execution exec) {
  if (params.runs < 1) throw InvalidParameter("runs must be at least 1", "runs");
  const auto runs = run_all<FramingRun>(params.runs, exec, [&](std::size_t i) { return framing_run(params, i); });
  FramingResult r;
  r.runs = runs.size();
  r.adversaries_per_run = runs.front().adversaries;
  for (const auto& run : runs) {
    r.observations += run.observations;
    r.observer_marks += run.observer_marks;
    r.honest_framed += run.honest_framed;
    if (run.honest_framed > 0) ++r.runs_with_framing;
  }
  return r;
}

bool CollusionResult::rate_consistent(double sigmas) const {
  return std::abs(honest_rate - expected_rate) <= sigmas * std_error;
}

CollusionRun collusion_run(const CollusionParams& params, std::size_t run) {
  if (params.n < 3) throw InvalidParameter("collusion suite needs at least three robots", "n");
  SimConfig config;
  config.n = params.n;
  config.p = params.p;
  config.delta = params.delta;
  config.intervals = params.delta;
  config.epsilon = params.epsilon;
  config.alpha = std::min(0.999, 2.0 / static_cast<double>(params.n));
  config.seed = derive_seed(params.seed, {kRunStream, run});
  const auto pair = pick_robots(params.n, 2, derive_seed(params.seed, {kPickStream, run}));
  config.adversaries.push_back({pair, Behavior::collude, 0, 0, 0});

  const SimTrace trace = run_simulation(config);
  const Verifier verifier(trace.central_key, trace.store);
  const LocalView view = build_central_view(trace.heads, trace.credentials, config.intervals, config.intervals, verifier);
  const auto suspects = detect_collusion(view, config.delta, params.epsilon, params.p);

  CollusionRun out;
  const std::size_t honest = params.n - 2;
  out.honest_pairs = honest * (honest - 1) / 2;
  for (const auto& s : suspects) {
    const bool a_bad = s.a == pair[0] || s.a == pair[1];
    const bool b_bad = s.b == pair[0] || s.b == pair[1];
    if (a_bad && b_bad) {
      out.colluders_flagged = true;
    } else if (!a_bad && !b_bad) {
      ++out.honest_flagged;
    }
  }
  return out;
}

CollusionResult run_collusion_suite(const CollusionParams& params, Execution exec) {
  if (params.runs < 1) throw InvalidParameter("runs must be at least 1", "runs");
  const auto runs = run_all<CollusionRun>(params.runs, exec, [&](std::size_t i) { return collusion_run(params, i); });
  CollusionResult r;
  r.runs = runs.size();
  for (const auto& run : runs) {
    if (run.colluders_flagged) ++r.colluders_flagged;
    r.honest_pairs += run.honest_pairs;
    r.honest_flagged += run.honest_flagged;
  }
  r.honest_rate = static_cast<double>(r.honest_flagged) / static_cast<double>(r.honest_pairs);
  r.expected_rate = prob_pair_meets_all(params.p, params.delta);
  r.std_error = std::sqrt(r.expected_rate * (1.0 - r.expected_rate) / static_cast<double>(r.honest_pairs));
  return r;
}

}  // namespace swarmhist
