#pragma once

// Post-task audit by the central control over every collected chain: full
// verification, pairing of every claimed encounter, and gaps left by absent
// robots.

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string_view>
#include <tuple>
#include <vector>

#include "swarmhist/chain.hpp"
#include "swarmhist/crypto.hpp"

namespace swarmhist {

struct SimTrace;

struct VerificationFailure {
  RobotId robot = 0;
  Interval interval = 0;
  RejectReason reason = RejectReason::none;

  friend bool operator==(const VerificationFailure&, const VerificationFailure&) = default;
};

enum class UnpairedCause {
  target_omitted,             // claimer handed over a valid history; target left it out
  target_record_unavailable,  // target has no link for that interval
  claimer_history_missing,    // claimer had no link for the previous interval to give
  claimer_history_invalid,    // claimer's previous link fails verification
};

std::string_view to_string(UnpairedCause cause);

struct UnpairedFinding {
  RobotId claimer = 0;
  RobotId target = 0;
  Interval interval = 0;
  RobotId attributed_to = 0;
  UnpairedCause cause = UnpairedCause::target_omitted;

  friend bool operator==(const UnpairedFinding&, const UnpairedFinding&) = default;
};

// Intervals [from, to] for which a robot's chain has no link.
struct DisappearanceGap {
  RobotId robot = 0;
  Interval from = 0;
  Interval to = 0;

  friend bool operator==(const DisappearanceGap&, const DisappearanceGap&) = default;
};

struct AuditReport {
  Interval intervals = 0;
  std::size_t links_verified = 0;
  std::vector<VerificationFailure> failures;
  std::vector<UnpairedFinding> unpaired;
  std::vector<DisappearanceGap> gaps;
  // Paired encounters (interval, a, b) with a < b.
  std::set<std::tuple<Interval, RobotId, RobotId>> encounters;

  std::size_t findings() const noexcept { return failures.size() + unpaired.size() + gaps.size(); }
  // Robots any finding is attributed to.
  std::set<RobotId> implicated() const;
};

// credentials[i] belongs to robot i + 1; robots without a head are reported
// as absent for the whole task. An entry pointing at a corrupt or missing
// record is not held against the robot holding the entry; the record's own
// chain walk reports it. A claim against a link that failed verification
// adds no unpaired finding on top of that failure.
AuditReport central_audit(const std::map<RobotId, Digest>& heads, const LinkStore& store,
                          std::span<const Credential> credentials, const PublicKey& central_key, Interval intervals);
AuditReport central_audit(const SimTrace& trace);

}  // namespace swarmhist
