#include <doctest.h>

#include <cmath>

#include "swarmhist/detect.hpp"
#include "swarmhist/error.hpp"
#include "swarmhist/prob.hpp"
#include "swarmhist/sim.hpp"

using namespace swarmhist;

namespace {

SimConfig base(std::size_t n, double p, Interval T, std::uint64_t seed = 1) {
  SimConfig c;
  c.n = n;
  c.p = p;
  c.intervals = T;
  c.delta = std::min<Interval>(3, T);
  c.seed = seed;
  return c;
}

LocalView view_of(const SimTrace& trace, RobotId r, const Verifier& v, Interval window) {
  return build_local_view(*trace.store.get(trace.heads.at(r)), trace.credentials[r - 1], trace.config.n, window, v);
}

bool listed(const std::vector<Sighting>& s, RobotId r) {
  return std::any_of(s.begin(), s.end(), [r](const Sighting& x) { return x.robot == r; });
}

}  // namespace

TEST_CASE("local views hold only verified content within the window") {
  const auto trace = run_simulation(base(10, 0.4, 6, 3));
  const Verifier v(trace.central_key, trace.store);
  const auto view = view_of(trace, 1, v, 3);
  CHECK(view.observer() == 1);
  CHECK(view.as_of() == 6);
  CHECK(view.earliest() == 4);
  CHECK(view.rejected_links() == 0);
  CHECK(view.dropped_entries() == 0);
  for (const auto& [key, peers] : view.links()) {
    CHECK(key.second >= 4);
    CHECK(key.second <= 6);
    CHECK(std::is_sorted(peers.begin(), peers.end()));
    for (auto q : peers) CHECK(trace.graphs[key.second - 1].has_edge(key.first, q));
  }
  CHECK(view.has_link(1, 6));
  CHECK_FALSE(view.has_link(1, 3));
}

TEST_CASE("honest views see unmet robots at least as often as the two-hop model predicts") {
  const ProbQuery q{25, 0.33, 3};
  const Estimate two_hop = mc_report_within(q, 200000, 17);
  std::size_t pairs = 0;
  std::size_t seen = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto trace = run_simulation(base(25, 0.33, 3, seed));
    const Verifier v(trace.central_key, trace.store);
    for (RobotId r = 1; r <= 25; ++r) {
      const auto missing = detect_disappeared(view_of(trace, r, v, 3), 3);
      pairs += 24;
      seen += 24 - missing.size();
    }
  }
  const double rate = static_cast<double>(seen) / static_cast<double>(pairs);
  const double se = std::sqrt(two_hop.std_error * two_hop.std_error + rate * (1 - rate) / static_cast<double>(pairs));
  CHECK(rate >= two_hop.point - 3 * se);
  CHECK(rate > 0.999);
}

TEST_CASE("a robot absent for the whole task is listed by every observer") {
  SimConfig c = base(12, 0.4, 4, 5);
  c.alpha = 0.1;
  c.adversaries.push_back({{7}, Behavior::disappear, 1, 4, 0});
  const auto trace = run_simulation(c);
  const Verifier v(trace.central_key, trace.store);
  for (RobotId r = 1; r <= 12; ++r) {
    if (r == 7) continue;
    const auto missing = detect_disappeared(view_of(trace, r, v, 3), 3);
    REQUIRE(listed(missing, 7));
    const auto it = std::find_if(missing.begin(), missing.end(), [](const Sighting& s) { return s.robot == 7; });
    CHECK_FALSE(it->last_seen.has_value());
  }
}

TEST_CASE("a robot that vanishes reports its last-seen interval") {
  SimConfig c = base(8, 1.0, 6, 2);
  c.alpha = 0.125;
  c.adversaries.push_back({{3}, Behavior::disappear, 3, 6, 0});
  const auto trace = run_simulation(c);
  const Verifier v(trace.central_key, trace.store);
  const auto view = build_central_view(trace.heads, trace.credentials, 6, 6, v);
  const auto missing = detect_disappeared(view, 3);
  REQUIRE(missing.size() == 1);
  CHECK(missing[0].robot == 3);
  CHECK(missing[0].last_seen == Interval{2});
}

TEST_CASE("delta 1 on a complete graph sees everyone") {
  const auto trace = run_simulation(base(6, 1.0, 1));
  const Verifier v(trace.central_key, trace.store);
  for (RobotId r = 1; r <= 6; ++r) CHECK(detect_disappeared(view_of(trace, r, v, 1), 1).empty());
}

TEST_CASE("detect_disappeared needs delta intervals of history") {
  const auto trace = run_simulation(base(5, 0.5, 2));
  const Verifier v(trace.central_key, trace.store);
  CHECK_THROWS_AS(detect_disappeared(view_of(trace, 1, v, 3), 3), InsufficientHistory);
  const auto longer = run_simulation(base(5, 0.5, 5));
  const Verifier v2(longer.central_key, longer.store);
  CHECK_THROWS_AS(detect_disappeared(view_of(longer, 1, v2, 2), 3), InsufficientHistory);
}

TEST_CASE("all-honest runs: everyone trusted or indeterminate, no collusion flags at k=1") {
  const auto trace = run_simulation(base(25, 0.33, 3, 8));
  const Verifier v(trace.central_key, trace.store);
  const auto central = build_central_view(trace.heads, trace.credentials, 3, 3, v);
  for (RobotId r = 1; r <= 25; ++r) {
    const auto verdict = check_pairing(central, r, 0.0, 25, 0.33);
    CHECK(verdict.status == PairingStatus::trusted);
    CHECK(verdict.charged_unpaired == 0);
    CHECK(verdict.excused_unpaired == 0);
  }
  const DetectionParams params{3, 0.0, 0.05, 25, 0.33};
  for (RobotId r = 1; r <= 25; ++r) {
    const auto report = analyze_view(view_of(trace, r, v, 3), params);
    CHECK(report.unpaired_claims.empty());
    CHECK(report.pairing_suspects.empty());
    for (const auto& s : report.collusion_suspects) CHECK(s.run == 3);
  }
}

TEST_CASE("a robot with no visible encounters is indeterminate") {
  const auto trace = run_simulation(base(4, 0.0, 3));
  const Verifier v(trace.central_key, trace.store);
  const auto view = build_central_view(trace.heads, trace.credentials, 3, 3, v);
  const auto verdict = check_pairing(view, 2, 0.0, 4, 0.0);
  CHECK(verdict.status == PairingStatus::indeterminate);
  CHECK_THROWS_AS(check_pairing(view, 2, 1.0, 4, 0.0), InvalidParameter);
}

TEST_CASE("refuse_record adversaries at alpha 1/3 leave honest robots trusted and seen") {
  struct Case {
    std::size_t n;
    double p;
    Interval delta;
  };
  for (const Case cs : {Case{25, 0.33, 3}, Case{48, 0.17, 4}}) {
    SimConfig c = base(cs.n, cs.p, cs.delta, 31);
    c.delta = cs.delta;
    c.alpha = 1.0 / 3.0;
    std::vector<RobotId> bad;
    for (RobotId r = 1; r <= cs.n / 3; ++r) bad.push_back(3 * r);
    c.adversaries.push_back({bad, Behavior::refuse_record, 0, 0, 0});
    const auto trace = run_simulation(c);
    const Verifier v(trace.central_key, trace.store);
    const auto central = build_central_view(trace.heads, trace.credentials, cs.delta, cs.delta, v);
    const auto missing = detect_disappeared(central, cs.delta);
    for (RobotId r = 1; r <= cs.n; ++r) {
      const bool is_bad = r % 3 == 0;
      if (is_bad) continue;
      CHECK_FALSE(listed(missing, r));
      CHECK(check_pairing(central, r, c.alpha, cs.n, cs.p).status == PairingStatus::trusted);
    }
    // Adversaries that met honest robots are charged for their omissions.
    std::size_t charged = 0;
    for (auto r : bad) charged += check_pairing(central, r, c.alpha, cs.n, cs.p).charged_unpaired;
    CHECK(charged > 0);
  }
}

TEST_CASE("a refuse_record robot that meets only honest robots fails the pairing test") {
  SimConfig c = base(6, 1.0, 3);
  c.alpha = 0.2;
  c.adversaries.push_back({{4}, Behavior::refuse_record, 0, 0, 0});
  const auto trace = run_simulation(c);
  const Verifier v(trace.central_key, trace.store);
  const auto view = build_central_view(trace.heads, trace.credentials, 3, 3, v);
  const auto verdict = check_pairing(view, 4, 0.2, 6, 1.0);
  CHECK(verdict.status == PairingStatus::suspicious);
  CHECK(verdict.paired == 0);
  CHECK(verdict.charged_unpaired == 15);
  CHECK(verdict.intervals_examined == 3);
  CHECK(check_pairing(view, 1, 0.2, 6, 1.0).excused_unpaired == 3);
  CHECK(check_pairing(view, 1, 0.2, 6, 1.0).status == PairingStatus::trusted);
}

TEST_CASE("colluding pairs are flagged with k and p^k") {
  for (const double p : {0.33, 0.17}) {
    SimConfig c = base(25, p, 3, 4);
    c.alpha = 0.08;
    c.adversaries.push_back({{4, 11}, Behavior::collude, 0, 0, 0});
    const auto trace = run_simulation(c);
    const Verifier v(trace.central_key, trace.store);
    const auto view = build_central_view(trace.heads, trace.credentials, 3, 3, v);
    const auto flagged = detect_collusion(view, 3, 0.05, p);
    const auto it = std::find_if(flagged.begin(), flagged.end(), [](const CollusionSuspect& s) { return s.a == 4 && s.b == 11; });
    REQUIRE(it != flagged.end());
    CHECK(it->run == 3);
    CHECK(it->probability == doctest::Approx(std::pow(p, 3)));
  }
}

TEST_CASE("an honest pair meeting once is not flagged") {
  SimConfig c = base(3, 0.33, 3);
  Simulation sim(c);
  for (int t = 0; t < 3; ++t) {
    sim.begin_interval();
    for (const auto& e : sim.current_graph().edges()) sim.exchange(e.u, e.v);
    sim.end_interval();
  }
  const auto& trace = sim.trace();
  const Verifier v(trace.central_key, trace.store);
  const auto view = build_central_view(trace.heads, trace.credentials, 3, 3, v);
  for (const auto& s : detect_collusion(view, 3, 0.05, 0.33)) CHECK(s.run >= 3);
  CHECK(std::pow(0.33, 1) >= 0.05);
  CHECK_THROWS_AS(detect_collusion(view, 3, 0.0, 0.33), InvalidParameter);
  CHECK_THROWS_AS(detect_collusion(view, 3, 1.0, 0.33), InvalidParameter);
}

TEST_CASE("revocation policies") {
  SuspicionReport empty;
  CHECK(update_revocation(empty, default_revocation_policy()).empty());

  SuspicionReport r;
  r.observer = 1;
  r.disappeared.push_back({5, std::nullopt});
  r.collusion_suspects.push_back({2, 3, 3, 0.036});
  CHECK(update_revocation(r, default_revocation_policy()) == std::set<RobotId>{2, 3, 5});
  CHECK(update_revocation(r, never_revoke()).empty());
  // Policies cannot revoke robots without evidence against them.
  const RevocationPolicy greedy = [](const SuspicionReport&) { return std::set<RobotId>{1, 2, 4, 5}; };
  CHECK(update_revocation(r, greedy) == std::set<RobotId>{2, 5});
}

TEST_CASE("analyze_view: revoked robots are a subset of the evidence") {
  SimConfig c = base(12, 0.3, 5, 6);
  c.alpha = 0.34;
  c.adversaries.push_back({{2}, Behavior::disappear, 2, 5, 0});
  c.adversaries.push_back({{5, 6}, Behavior::collude, 0, 0, 0});
  c.adversaries.push_back({{9}, Behavior::refuse_record, 0, 0, 0});
  const auto trace = run_simulation(c);
  const Verifier v(trace.central_key, trace.store);
  const DetectionParams params{3, 0.34, 0.05, 12, 0.3};
  for (const auto& [robot, digest] : trace.heads) {
    const auto report = analyze_view(view_of(trace, robot, v, 3), params);
    std::set<RobotId> evidence;
    for (const auto& s : report.disappeared) evidence.insert(s.robot);
    for (const auto& [x, verdict] : report.pairing_suspects) evidence.insert(x);
    for (const auto& s : report.collusion_suspects) evidence.insert({s.a, s.b});
    for (auto x : report.revoked) CHECK(evidence.contains(x));
    CHECK_FALSE(report.revoked.contains(robot));
  }
  const auto central = analyze_view(build_central_view(trace.heads, trace.credentials, 5, 3, v), params);
  CHECK(central.revoked.contains(2));
  CHECK(central.revoked.contains(5));
  CHECK(central.revoked.contains(6));
}

TEST_CASE("links carrying a forged entry are rejected whole") {
  SimConfig c = base(6, 0.3, 6, 12);
  c.alpha = 0.2;
  c.adversaries.push_back({{1}, Behavior::forge_claim, 0, 0, 2});
  const auto trace = run_simulation(c);
  const Verifier v(trace.central_key, trace.store);
  const auto view = build_central_view(trace.heads, trace.credentials, 6, 6, v);
  std::size_t forged_intervals = 0;
  for (Interval t = 1; t <= 6; ++t) {
    const bool met = trace.graphs[t - 1].has_edge(1, 2);
    if (!met) ++forged_intervals;
    CHECK(view.has_link(1, t) == met);
  }
  REQUIRE(forged_intervals > 0);
  CHECK(view.rejected_links() > 0);
  for (const auto& [key, peers] : view.links()) {
    if (std::binary_search(peers.begin(), peers.end(), RobotId{2})) {
      CHECK(trace.graphs[key.second - 1].has_edge(key.first, 2));
    }
  }
}
