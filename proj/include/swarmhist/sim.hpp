#pragma once

// Discrete-interval swarm simulator. Each interval samples G_t(N, p), runs one
// history exchange per edge between active robots, then every active robot
// builds its event list and extends its chain. Adversarial robots deviate as
// described by their AdversaryProfile.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "swarmhist/chain.hpp"
#include "swarmhist/crypto.hpp"
#include "swarmhist/graph.hpp"

namespace swarmhist {

enum class Behavior {
  refuse_record,  // receives histories but leaves peers outside its group off its event list
  refuse_give,    // hands over nothing and records nothing
  disappear,      // absent for intervals [from, to]
  collude,        // members fabricate mutual entries every interval
  forge_claim,    // tries to claim meetings with `target` without its signature
};

std::string_view to_string(Behavior b);
Behavior behavior_from_string(std::string_view s);  // throws InvalidParameter

struct AdversaryProfile {
  std::vector<RobotId> robots;
  Behavior behavior = Behavior::refuse_record;
  Interval from = 0;  // disappear only, inclusive
  Interval to = 0;
  RobotId target = 0;  // forge_claim only

  friend bool operator==(const AdversaryProfile&, const AdversaryProfile&) = default;
};

struct SimConfig {
  std::size_t n = 0;
  double p = 0.0;
  Interval intervals = 0;
  Interval delta = 3;
  double alpha = 0.0;
  std::optional<Interval> window;  // chain depth W; defaults to delta
  double epsilon = 0.05;           // collusion flag threshold used by local revocation
  std::uint64_t seed = 0;
  std::vector<AdversaryProfile> adversaries;
  // When set, robots analyse their local view after every interval t >= delta
  // and ignore exchanges from robots they have revoked.
  bool local_revocation = false;

  Interval chain_window() const noexcept { return window.value_or(delta); }

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

// Throws InvalidParameter whose field() names the offending setting.
void validate(const SimConfig& config);

// Every robot listed in any adversary profile.
std::set<RobotId> adversary_ids(const SimConfig& config);

// How `from`'s history fared in `to`'s hands.
enum class ExchangeOutcome {
  given,       // handed over, verified and recorded
  withheld,    // sender refused to give
  omitted,     // receiver got it but left it off its event list
  rejected,    // missing, stale or failed verification
  fabricated,  // colluder entry with no meeting behind it
  forged,      // forgery attempt naming `from`
  ignored,     // receiver had revoked the sender
};

std::string_view to_string(ExchangeOutcome o);
ExchangeOutcome exchange_outcome_from_string(std::string_view s);

struct ExchangeRecord {
  Interval interval = 0;
  RobotId from = 0;
  RobotId to = 0;
  ExchangeOutcome outcome = ExchangeOutcome::given;

  friend bool operator==(const ExchangeRecord&, const ExchangeRecord&) = default;
};

struct SimTrace {
  SimConfig config;
  PublicKey central_key{};
  std::vector<Credential> credentials;     // credentials[i].robot_id == i + 1
  std::vector<EncounterGraph> graphs;      // effective G_t for t = 1..T
  std::map<RobotId, Digest> heads;         // latest link of each robot that has one
  LinkStore store;
  std::vector<ExchangeRecord> log;
};

// Active flags indexed by robot id (index 0 unused).
std::vector<bool> apply_disappearance(std::span<const AdversaryProfile> profiles, std::size_t n, Interval t);

class Simulation {
 public:
  explicit Simulation(SimConfig config);
  ~Simulation();
  Simulation(Simulation&&) noexcept;
  Simulation& operator=(Simulation&&) noexcept;

  // Starts the next interval: samples its graph and drops inactive robots.
  void begin_interval();
  // One history exchange between neighbours i and j in the current interval.
  // Throws ContractViolation if the pair is not an edge of the current graph
  // or already exchanged this interval.
  std::pair<ExchangeOutcome, ExchangeOutcome> exchange(RobotId i, RobotId j);
  // Builds event lists and extends every active robot's chain.
  void end_interval();
  // Runs every remaining interval with all edges exchanged.
  void run();

  Interval current_interval() const noexcept;
  const EncounterGraph& current_graph() const;
  const std::vector<bool>& active() const noexcept;
  LinkPtr head(RobotId r) const;
  const SigningIdentity& identity(RobotId r) const;
  const std::set<RobotId>& revoked_by(RobotId r) const;

  const SimTrace& trace() const noexcept;
  SimTrace finish() &&;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

SimTrace run_simulation(const SimConfig& config);

}  // namespace swarmhist
