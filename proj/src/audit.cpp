#include "swarmhist/audit.hpp"

#include <algorithm>

#include "swarmhist/sim.hpp"

namespace swarmhist {

namespace {

enum class LinkState { valid, invalid };

struct Walk {
  std::map<std::pair<RobotId, Interval>, LinkState> state;
  std::map<std::pair<RobotId, Interval>, std::vector<RobotId>> claims;  // valid links only
};

void walk_chain(RobotId robot, const Digest& head, const Credential& cred, Interval intervals,
                const Verifier& verifier, AuditReport& report, Walk& walk) {
  const LinkStore& store = verifier.store();
  Digest key = head;
  const LinkStore::Record* rec = store.find(key);
  if (rec == nullptr) {
    report.failures.push_back({robot, intervals, RejectReason::missing_link});
    return;
  }
  if (rec->link->interval < intervals) report.gaps.push_back({robot, rec->link->interval + 1, intervals});

  while (rec != nullptr) {
    const HistoryLink& link = *rec->link;
    RejectReason reason = rec->digest != key ? RejectReason::digest_mismatch : verifier.check_link(link, cred, false);
    if (reason == RejectReason::none) {
      ++report.links_verified;
      walk.state[{robot, link.interval}] = LinkState::valid;
      auto& peers = walk.claims[{robot, link.interval}];
      for (const auto& e : link.events.entries()) peers.push_back(e.peer_id);
    } else {
      report.failures.push_back({robot, link.interval, reason});
      walk.state[{robot, link.interval}] = LinkState::invalid;
    }

    if (link.prev_digest.is_genesis()) {
      if (link.interval > 1) report.gaps.push_back({robot, 1, link.interval - 1});
      return;
    }
    const LinkStore::Record* prev = store.find(link.prev_digest);
    if (prev == nullptr) {
      report.failures.push_back({robot, link.interval - 1, RejectReason::missing_link});
      return;
    }
    if (prev->link->interval >= link.interval) {
      report.failures.push_back({robot, link.interval, RejectReason::interval_mismatch});
      return;
    }
    if (prev->link->interval + 1 < link.interval) {
      report.gaps.push_back({robot, prev->link->interval + 1, link.interval - 1});
    }
    key = link.prev_digest;
    rec = prev;
  }
}

}  // namespace

std::string_view to_string(UnpairedCause cause) {
  switch (cause) {
    case UnpairedCause::target_omitted: return "target_omitted";
    case UnpairedCause::target_record_unavailable: return "target_record_unavailable";
    case UnpairedCause::claimer_history_missing: return "claimer_history_missing";
    case UnpairedCause::claimer_history_invalid: return "claimer_history_invalid";
  }
  return "unknown";
}

std::set<RobotId> AuditReport::implicated() const {
  std::set<RobotId> out;
  for (const auto& f : failures) out.insert(f.robot);
  for (const auto& u : unpaired) out.insert(u.attributed_to);
  for (const auto& g : gaps) out.insert(g.robot);
  return out;
}

AuditReport central_audit(const std::map<RobotId, Digest>& heads, const LinkStore& store,
                          std::span<const Credential> credentials, const PublicKey& central_key, Interval intervals) {
  const Verifier verifier(central_key, store);
  AuditReport report;
  report.intervals = intervals;
  Walk walk;

  for (RobotId r = 1; r <= credentials.size(); ++r) {
    auto it = heads.find(r);
    if (it == heads.end()) {
      if (intervals >= 1) report.gaps.push_back({r, 1, intervals});
      continue;
    }
    walk_chain(r, it->second, credentials[r - 1], intervals, verifier, report, walk);
  }

  auto state_of = [&](RobotId r, Interval t) -> const LinkState* {
    auto it = walk.state.find({r, t});
    return it == walk.state.end() ? nullptr : &it->second;
  };

  for (const auto& [key, peers] : walk.claims) {
    const auto [claimer, t] = key;
    for (auto target : peers) {
      auto back = walk.claims.find({target, t});
      const bool target_valid = back != walk.claims.end();
      if (target_valid && std::binary_search(back->second.begin(), back->second.end(), claimer)) {
        if (claimer < target) report.encounters.insert({t, claimer, target});
        continue;
      }
      // A target link that fails verification is already reported as such.
      if (!target_valid && state_of(target, t) != nullptr) continue;
      UnpairedFinding f{claimer, target, t, target, UnpairedCause::target_omitted};
      const LinkState* prior = t > 1 ? state_of(claimer, t - 1) : nullptr;
      if (t > 1 && prior == nullptr) {
        f.attributed_to = claimer;
        f.cause = UnpairedCause::claimer_history_missing;
      } else if (prior != nullptr && *prior == LinkState::invalid) {
        f.attributed_to = claimer;
        f.cause = UnpairedCause::claimer_history_invalid;
      } else if (!target_valid) {
        f.cause = UnpairedCause::target_record_unavailable;
      }
      report.unpaired.push_back(f);
    }
  }
  std::sort(report.gaps.begin(), report.gaps.end(), [](const auto& a, const auto& b) {
    return std::tie(a.robot, a.from) < std::tie(b.robot, b.from);
  });
  return report;
}

AuditReport central_audit(const SimTrace& trace) {
  return central_audit(trace.heads, trace.store, trace.credentials, trace.central_key, trace.config.intervals);
}

}  // namespace swarmhist
