#include "swarmhist/prob.hpp"

#include <cmath>
#include <vector>

#include "swarmhist/error.hpp"
#include "swarmhist/graph.hpp"
#include "swarmhist/rng.hpp"

namespace swarmhist {

namespace {

constexpr RobotId kObserver = 1;
constexpr RobotId kSubject = 2;

Estimate make_estimate(std::size_t successes, std::size_t trials, std::uint64_t seed) {
  Estimate e;
  e.trials = trials;
  e.successes = successes;
  e.seed = seed;
  e.point = static_cast<double>(successes) / static_cast<double>(trials);
  e.std_error = std::sqrt(e.point * (1.0 - e.point) / static_cast<double>(trials));
  return e;
}

void check_trials(std::size_t trials) {
  if (trials < 1) throw InvalidParameter("trials must be at least 1", "trials");
}

}  // namespace

void validate(const ProbQuery& q) {
  if (q.n < 2) throw InvalidParameter("n must be at least 2", "n");
  if (!(q.p >= 0.0 && q.p <= 1.0)) throw InvalidParameter("p must lie in [0, 1]", "p");
  if (q.delta < 1) throw InvalidParameter("delta must be at least 1", "delta");
}

double prob_no_report(const ProbQuery& q) {
  validate(q);
  const double d = q.delta;
  const double exponent = (1.0 + (d - 1.0) * static_cast<double>(q.n) * q.p / 2.0) * d;
  return std::pow(1.0 - q.p, exponent);
}

double prob_report_within(const ProbQuery& q) { return 1.0 - prob_no_report(q); }

double prob_pair_meets_all(double p, Interval delta) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameter("p must lie in [0, 1]", "p");
  if (delta < 1) throw InvalidParameter("delta must be at least 1", "delta");
  return std::pow(p, static_cast<double>(delta));
}

bool report_within_trial(const ProbQuery& q, std::uint64_t seed, std::uint64_t trial) {
  Rng rng(derive_seed(seed, {kTrialStream, trial}));
  // met_subject[r]: r met the subject in some interval before the current one.
  std::vector<char> met_subject(q.n + 1, 0);
  std::vector<RobotId> newly;
  bool reported = false;
  for (Interval t = 1; t <= q.delta; ++t) {
    const EncounterGraph g = gen_interval_graph(q.n, q.p, t, rng);
    if (reported) continue;
    for (auto r : g.neighbors(kObserver)) {
      if (r == kSubject || met_subject[r]) reported = true;
    }
    newly.clear();
    for (auto r : g.neighbors(kSubject)) {
      if (r != kObserver) newly.push_back(r);
    }
    for (auto r : newly) met_subject[r] = 1;
  }
  return reported;
}

Estimate mc_report_within(const ProbQuery& q, std::size_t trials, std::uint64_t seed) {
  validate(q);
  check_trials(trials);
  const auto count = static_cast<std::int64_t>(trials);
  std::int64_t successes = 0;
#pragma omp parallel for reduction(+ : successes) schedule(static)
  for (std::int64_t i = 0; i < count; ++i) {
    if (report_within_trial(q, seed, static_cast<std::uint64_t>(i))) ++successes;
  }
  return make_estimate(static_cast<std::size_t>(successes), trials, seed);
}

Estimate mc_report_within_serial(const ProbQuery& q, std::size_t trials, std::uint64_t seed) {
  validate(q);
  check_trials(trials);
  std::size_t successes = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    if (report_within_trial(q, seed, i)) ++successes;
  }
  return make_estimate(successes, trials, seed);
}

double exact_small_enumeration(const ProbQuery& q) {
  validate(q);
  const std::size_t pairs = q.n * (q.n - 1) / 2;
  const std::size_t slots = pairs * q.delta;
  if (slots > kMaxEnumerationSlots) {
    throw Infeasible("enumeration needs " + std::to_string(slots) + " edge slots; limit is " +
                     std::to_string(kMaxEnumerationSlots));
  }
  // Vertex 0 is the observer, vertex 1 the subject.
  std::vector<std::vector<int>> slot_of(q.n, std::vector<int>(q.n, -1));
  int next = 0;
  for (std::size_t u = 0; u < q.n; ++u) {
    for (std::size_t v = u + 1; v < q.n; ++v) slot_of[u][v] = slot_of[v][u] = next++;
  }
  auto edge = [&](std::uint64_t mask, Interval t, std::size_t u, std::size_t v) {
    return (mask >> ((t - 1) * pairs + static_cast<std::size_t>(slot_of[u][v]))) & 1u;
  };

  // Reported patterns counted by edge count, weighted once at the end.
  std::vector<std::uint64_t> reported_by_count(slots + 1, 0);
  const std::uint64_t patterns = std::uint64_t{1} << slots;
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    bool reported = false;
    for (Interval t = 1; t <= q.delta && !reported; ++t) {
      if (edge(mask, t, 0, 1)) reported = true;
      for (std::size_t relay = 2; relay < q.n && !reported; ++relay) {
        if (!edge(mask, t, 0, relay)) continue;
        for (Interval s = 1; s < t; ++s) {
          if (edge(mask, s, relay, 1)) {
            reported = true;
            break;
          }
        }
      }
    }
    if (reported) ++reported_by_count[static_cast<std::size_t>(__builtin_popcountll(mask))];
  }
  double total = 0.0;
  for (std::size_t k = 0; k <= slots; ++k) {
    if (reported_by_count[k] == 0) continue;
    total += static_cast<double>(reported_by_count[k]) * std::pow(q.p, static_cast<double>(k)) *
             std::pow(1.0 - q.p, static_cast<double>(slots - k));
  }
  return total;
}

}  // namespace swarmhist
