#pragma once

// Local analysis of encounter histories: who has gone unseen, who fails to
// pair its encounters, which pairs meet improbably often, and the resulting
// local revocation list.

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "swarmhist/chain.hpp"
#include "swarmhist/crypto.hpp"

namespace swarmhist {

// Verified chain content one observer can reach from its own head (or, for
// the central view, from every collected head), restricted to intervals
// [earliest, as_of]. Links that fail verification are dropped along with
// everything only reachable through them; entries whose referenced history
// cannot be fetched are dropped individually.
class LocalView {
 public:
  using Key = std::pair<RobotId, Interval>;  // (owner, interval)

  RobotId observer() const noexcept { return observer_; }  // 0 = central control
  Interval as_of() const noexcept { return as_of_; }
  Interval earliest() const noexcept { return earliest_; }
  std::size_t n() const noexcept { return n_; }

  // Verified peers recorded by `owner` for interval t, or nullptr.
  const std::vector<RobotId>* peers_of(RobotId owner, Interval t) const;
  bool has_link(RobotId owner, Interval t) const { return peers_of(owner, t) != nullptr; }
  const std::map<Key, std::vector<RobotId>>& links() const noexcept { return links_; }

  std::size_t rejected_links() const noexcept { return rejected_links_; }
  std::size_t dropped_entries() const noexcept { return dropped_entries_; }
  // Owners seen signing two different links for one interval.
  const std::set<RobotId>& equivocators() const noexcept { return equivocators_; }

 private:
  friend class ViewBuilder;

  RobotId observer_ = 0;
  Interval as_of_ = 0;
  Interval earliest_ = 1;
  std::size_t n_ = 0;
  std::map<Key, std::vector<RobotId>> links_;
  std::size_t rejected_links_ = 0;
  std::size_t dropped_entries_ = 0;
  std::set<RobotId> equivocators_;
};

// View of the observer owning `head`, covering the `window` most recent
// intervals. The head must verify, otherwise the view is empty.
LocalView build_local_view(const HistoryLink& head, const Credential& observer, std::size_t n, Interval window,
                           const Verifier& verifier);

// Everything reachable from all collected heads; credentials[i] is robot i+1.
LocalView build_central_view(const std::map<RobotId, Digest>& heads, std::span<const Credential> credentials,
                             Interval as_of, Interval window, const Verifier& verifier);

struct Sighting {
  RobotId robot = 0;
  std::optional<Interval> last_seen;  // latest interval any verified entry names the robot

  friend bool operator==(const Sighting&, const Sighting&) = default;
};

// Robots (other than the observer) named by no verified entry dated in
// [as_of - delta + 1, as_of]. Throws InsufficientHistory when the view cannot
// cover delta intervals.
std::vector<Sighting> detect_disappeared(const LocalView& view, Interval delta);

enum class PairingStatus { trusted, suspicious, indeterminate };

struct PairingVerdict {
  PairingStatus status = PairingStatus::indeterminate;
  std::size_t paired = 0;
  // Peers hold the subject's signed history but the subject did not record them.
  std::size_t charged_unpaired = 0;
  // The subject recorded a peer that did not record it back (peer's fault).
  std::size_t excused_unpaired = 0;
  std::size_t required = 0;
  std::size_t intervals_examined = 0;
  double expected_paired_per_interval = 0.0;  // (1 - alpha) * n * p
};

// Paired-record test for `subject` over the view's window.
PairingVerdict check_pairing(const LocalView& view, RobotId subject, double alpha, std::size_t n, double p);

struct CollusionSuspect {
  RobotId a = 0;  // a < b
  RobotId b = 0;
  Interval run = 0;          // longest run of consecutive co-meeting intervals
  double probability = 0.0;  // p^run

  friend bool operator==(const CollusionSuspect&, const CollusionSuspect&) = default;
};

// Pairs recorded together in k consecutive intervals within the last delta
// intervals of the view with p^k < epsilon. Throws InvalidParameter unless
// 0 < epsilon < 1.
std::vector<CollusionSuspect> detect_collusion(const LocalView& view, Interval delta, double epsilon, double p);

struct UnpairedClaim {
  RobotId claimer = 0;
  RobotId target = 0;
  Interval interval = 0;

  friend bool operator==(const UnpairedClaim&, const UnpairedClaim&) = default;
};

struct SuspicionReport {
  RobotId observer = 0;
  Interval as_of = 0;
  Interval delta = 0;
  bool history_sufficient = false;  // false: disappearance check skipped
  std::vector<Sighting> disappeared;
  std::vector<UnpairedClaim> unpaired_claims;
  std::vector<CollusionSuspect> collusion_suspects;
  std::map<RobotId, PairingVerdict> pairing_suspects;
  std::set<RobotId> revoked;
};

using RevocationPolicy = std::function<std::set<RobotId>(const SuspicionReport&)>;

// Revoke anything disappeared, failing the pairing test, or in a flagged pair.
RevocationPolicy default_revocation_policy();
RevocationPolicy never_revoke();

std::set<RobotId> update_revocation(const SuspicionReport& report, const RevocationPolicy& policy);

struct DetectionParams {
  Interval delta = 3;
  double alpha = 0.0;
  double epsilon = 0.05;
  std::size_t n = 0;
  double p = 0.0;
};

SuspicionReport analyze_view(const LocalView& view, const DetectionParams& params,
                             const RevocationPolicy& policy = default_revocation_policy());

}  // namespace swarmhist
