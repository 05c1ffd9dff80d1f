#include "swarmhist/detect.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_set>

#include "swarmhist/error.hpp"

namespace swarmhist {

class ViewBuilder {
 public:
  ViewBuilder(LocalView& view, const Verifier& verifier, RobotId observer, Interval as_of, Interval earliest,
              std::size_t n)
      : view_(view), verifier_(verifier) {
    view_.observer_ = observer;
    view_.as_of_ = as_of;
    view_.earliest_ = earliest;
    view_.n_ = n;
  }

  void push(const Digest& key, LinkPtr link, const Credential& cred) {
    if (!link || link->interval < view_.earliest_ || link->interval > view_.as_of_) return;
    if (!seen_.insert(key).second) return;
    queue_.push_back({std::move(link), cred});
  }

  void push_stored(const Digest& key, const Credential& cred) {
    const LinkStore::Record* rec = verifier_.store().find(key);
    if (rec == nullptr || rec->digest != key) return;
    push(key, rec->link, cred);
  }

  void drain() {
    while (!queue_.empty()) {
      auto [link, cred] = std::move(queue_.front());
      queue_.pop_front();
      ingest(*link, cred);
    }
  }

 private:
  void ingest(const HistoryLink& link, const Credential& cred) {
    if (verifier_.check_link_signature(link, cred) != RejectReason::none) {
      ++view_.rejected_links_;
      return;
    }
    std::vector<RobotId> peers;
    std::vector<const EventEntry*> follow;
    for (const auto& e : link.events.entries()) {
      switch (verifier_.check_entry(e, link.interval)) {
        case EntryStatus::valid:
          peers.push_back(e.peer_id);
          follow.push_back(&e);
          break;
        case EntryStatus::unresolvable: ++view_.dropped_entries_; break;
        case EntryStatus::invalid:
          // The owner signed an entry it could not have obtained honestly.
          ++view_.rejected_links_;
          return;
      }
    }
    const LocalView::Key key{link.owner_id, link.interval};
    auto [it, inserted] = view_.links_.try_emplace(key, peers);
    if (!inserted && it->second != peers) {
      view_.equivocators_.insert(link.owner_id);
      std::vector<RobotId> merged;
      std::set_union(it->second.begin(), it->second.end(), peers.begin(), peers.end(), std::back_inserter(merged));
      it->second = std::move(merged);
    }
    if (!link.prev_digest.is_genesis()) push_stored(link.prev_digest, cred);
    for (const EventEntry* e : follow) {
      if (!e->peer_link_digest.is_genesis()) push_stored(e->peer_link_digest, e->peer_credential);
    }
  }

  struct Item {
    LinkPtr link;
    Credential cred;
  };

  LocalView& view_;
  const Verifier& verifier_;
  std::deque<Item> queue_;
  std::unordered_set<Digest, DigestHasher> seen_;
};

namespace {

Interval window_start(Interval as_of, Interval window) { return as_of >= window ? as_of - window + 1 : 1; }

}  // namespace

const std::vector<RobotId>* LocalView::peers_of(RobotId owner, Interval t) const {
  auto it = links_.find({owner, t});
  return it == links_.end() ? nullptr : &it->second;
}

LocalView build_local_view(const HistoryLink& head, const Credential& observer, std::size_t n, Interval window,
                           const Verifier& verifier) {
  if (window < 1) throw InvalidParameter("window must be at least 1", "window");
  LocalView view;
  ViewBuilder builder(view, verifier, observer.robot_id, head.interval, window_start(head.interval, window), n);
  builder.push(digest_of(head), std::make_shared<const HistoryLink>(head), observer);
  builder.drain();
  return view;
}

LocalView build_central_view(const std::map<RobotId, Digest>& heads, std::span<const Credential> credentials,
                             Interval as_of, Interval window, const Verifier& verifier) {
  if (window < 1) throw InvalidParameter("window must be at least 1", "window");
  LocalView view;
  ViewBuilder builder(view, verifier, 0, as_of, window_start(as_of, window), credentials.size());
  for (const auto& [robot, digest] : heads) {
    if (robot < 1 || robot > credentials.size()) continue;
    builder.push_stored(digest, credentials[robot - 1]);
  }
  builder.drain();
  return view;
}

std::vector<Sighting> detect_disappeared(const LocalView& view, Interval delta) {
  if (delta < 1) throw InvalidParameter("delta must be at least 1", "delta");
  if (view.as_of() < delta) throw InsufficientHistory("view ends before delta intervals have elapsed");
  const Interval from = view.as_of() - delta + 1;
  if (view.earliest() > from) throw InsufficientHistory("view window is shorter than delta");

  std::vector<std::optional<Interval>> last(view.n() + 1);
  for (const auto& [key, peers] : view.links()) {
    for (auto peer : peers) {
      if (peer < 1 || peer > view.n()) continue;
      if (!last[peer] || *last[peer] < key.second) last[peer] = key.second;
    }
  }
  std::vector<Sighting> out;
  for (RobotId r = 1; r <= view.n(); ++r) {
    if (r == view.observer()) continue;
    if (!last[r] || *last[r] < from) out.push_back({r, last[r]});
  }
  return out;
}

PairingVerdict check_pairing(const LocalView& view, RobotId subject, double alpha, std::size_t n, double p) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw InvalidParameter("alpha must lie in [0, 1)", "alpha");
  PairingVerdict v;
  v.expected_paired_per_interval = (1.0 - alpha) * static_cast<double>(n) * p;
  std::set<Interval> examined;

  auto contains = [](const std::vector<RobotId>& peers, RobotId r) {
    return std::binary_search(peers.begin(), peers.end(), r);
  };

  for (const auto& [key, peers] : view.links()) {
    const auto [owner, t] = key;
    if (owner == subject) {
      for (auto peer : peers) {
        const auto* back = view.peers_of(peer, t);
        if (back == nullptr) continue;
        examined.insert(t);
        if (contains(*back, subject)) {
          ++v.paired;
        } else {
          ++v.excused_unpaired;
        }
      }
    } else if (contains(peers, subject)) {
      const auto* mine = view.peers_of(subject, t);
      if (mine == nullptr || contains(*mine, owner)) continue;  // paired case counted above
      examined.insert(t);
      ++v.charged_unpaired;
    }
  }
  v.intervals_examined = examined.size();
  const std::size_t records = v.paired + v.charged_unpaired;
  if (records == 0) return v;
  v.required = static_cast<std::size_t>(std::ceil((1.0 - alpha) * static_cast<double>(records) - 1e-9));
  v.status = v.paired >= v.required ? PairingStatus::trusted : PairingStatus::suspicious;
  return v;
}

std::vector<CollusionSuspect> detect_collusion(const LocalView& view, Interval delta, double epsilon, double p) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidParameter("epsilon must lie in (0, 1)", "epsilon");
  if (delta < 1) throw InvalidParameter("delta must be at least 1", "delta");
  const Interval from = std::max(view.earliest(), view.as_of() >= delta ? view.as_of() - delta + 1 : Interval{1});

  std::map<std::pair<RobotId, RobotId>, std::set<Interval>> met;
  for (const auto& [key, peers] : view.links()) {
    const auto [owner, t] = key;
    if (t < from) continue;
    for (auto peer : peers) met[std::minmax(owner, peer)].insert(t);
  }
  std::vector<CollusionSuspect> out;
  for (const auto& [pair, intervals] : met) {
    Interval best = 0;
    Interval run = 0;
    Interval prev = 0;
    for (auto t : intervals) {
      run = (run > 0 && t == prev + 1) ? run + 1 : 1;
      prev = t;
      best = std::max(best, run);
    }
    const double prob = std::pow(p, static_cast<double>(best));
    if (prob < epsilon) out.push_back({pair.first, pair.second, best, prob});
  }
  return out;
}

RevocationPolicy default_revocation_policy() {
  return [](const SuspicionReport& r) {
    std::set<RobotId> out;
    for (const auto& s : r.disappeared) out.insert(s.robot);
    for (const auto& [robot, verdict] : r.pairing_suspects) out.insert(robot);
    for (const auto& c : r.collusion_suspects) {
      out.insert(c.a);
      out.insert(c.b);
    }
    out.erase(r.observer);
    return out;
  };
}

RevocationPolicy never_revoke() {
  return [](const SuspicionReport&) { return std::set<RobotId>{}; };
}

std::set<RobotId> update_revocation(const SuspicionReport& report, const RevocationPolicy& policy) {
  if (!policy) return {};
  // Only robots with evidence against them can be revoked.
  const std::set<RobotId> evidence = default_revocation_policy()(report);
  std::set<RobotId> out;
  for (auto r : policy(report)) {
    if (evidence.contains(r)) out.insert(r);
  }
  return out;
}

SuspicionReport analyze_view(const LocalView& view, const DetectionParams& params, const RevocationPolicy& policy) {
  SuspicionReport report;
  report.observer = view.observer();
  report.as_of = view.as_of();
  report.delta = params.delta;
  report.history_sufficient =
      params.delta >= 1 && view.as_of() >= params.delta && view.earliest() <= view.as_of() - params.delta + 1;
  if (report.history_sufficient) report.disappeared = detect_disappeared(view, params.delta);

  for (const auto& [key, peers] : view.links()) {
    const auto [owner, t] = key;
    for (auto peer : peers) {
      const auto* back = view.peers_of(peer, t);
      if (back != nullptr && !std::binary_search(back->begin(), back->end(), owner)) {
        report.unpaired_claims.push_back({owner, peer, t});
      }
    }
  }
  for (RobotId r = 1; r <= view.n(); ++r) {
    if (r == view.observer()) continue;
    auto verdict = check_pairing(view, r, params.alpha, params.n, params.p);
    if (verdict.status == PairingStatus::suspicious) report.pairing_suspects.emplace(r, verdict);
  }
  report.collusion_suspects = detect_collusion(view, params.delta, params.epsilon, params.p);
  report.revoked = update_revocation(report, policy);
  return report;
}

}  // namespace swarmhist
