#pragma once

// Test fixtures built directly on the chain API, independent of the simulator.

#include <map>
#include <random>
#include <utility>
#include <vector>

#include "swarmhist/chain.hpp"
#include "swarmhist/crypto.hpp"
#include "swarmhist/error.hpp"

namespace swarmhist::testing {

// Honest robots exchanging histories along scripted edge lists.
struct MiniSwarm {
  explicit MiniSwarm(std::size_t n, std::uint64_t seed = 1) : swarm(provision_swarm(n, seed)), heads(n + 1) {}

  const Credential& cred(RobotId r) const { return swarm.identities[r - 1].credential(); }
  const SigningIdentity& id(RobotId r) const { return swarm.identities[r - 1]; }
  Verifier verifier() const { return Verifier(swarm.central_key, store); }

  HistoryOffer offer(RobotId r) const {
    return HistoryOffer{cred(r), heads[r], heads[r] ? Bytes{} : genesis_attestation(id(r))};
  }

  // One interval in which every listed pair meets.
  void step(const std::vector<std::pair<RobotId, RobotId>>& edges) {
    const Interval t = ++interval;
    std::map<RobotId, std::vector<HistoryOffer>> got;
    for (auto [a, b] : edges) {
      got[a].push_back(offer(b));
      got[b].push_back(offer(a));
    }
    std::vector<LinkPtr> next(heads.size());
    const Verifier v = verifier();
    for (RobotId r = 1; r < heads.size(); ++r) {
      EventList events = build_event_list(r, t, got[r], v);
      next[r] = extend_history(id(r), heads[r].get(), std::move(events), store);
    }
    heads = std::move(next);
  }

  ProvisionedSwarm swarm;
  LinkStore store;
  std::vector<LinkPtr> heads;  // index 0 unused
  Interval interval = 0;
};

struct TamperCase {
  std::size_t length = 0;
  bool clean_accepted = false;
  bool mutated_rejected = false;
};

// Builds an honest chain of 1..10 links in a random small swarm, then flips
// one byte of one encoded link of that chain and verifies at full length.
// A mutation the strict decoder refuses counts as rejected.
inline TamperCase tamper_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t n = 2 + rng() % 4;
  MiniSwarm ms(n, seed);
  const std::size_t length = 1 + rng() % 10;
  for (std::size_t t = 0; t < length; ++t) {
    std::vector<std::pair<RobotId, RobotId>> edges;
    for (RobotId a = 1; a <= n; ++a) {
      for (RobotId b = a + 1; b <= n; ++b) {
        if (rng() % 2) edges.emplace_back(a, b);
      }
    }
    ms.step(edges);
  }
  const RobotId owner = 1 + static_cast<RobotId>(rng() % n);
  TamperCase out;
  out.length = length;
  const LinkPtr head = ms.heads[owner];
  out.clean_accepted = verify_chain(*head, ms.cred(owner), ms.store, length, ms.swarm.central_key).accepted();

  std::vector<std::pair<Digest, LinkPtr>> chain;
  for (LinkPtr l = head; l;) {
    chain.emplace_back(digest_of(*l), l);
    l = l->prev_digest.is_genesis() ? nullptr : ms.store.get(l->prev_digest);
  }
  const auto& [key, victim] = chain[rng() % chain.size()];
  Bytes raw = encode_link(*victim);
  raw[rng() % raw.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
  HistoryLink mutated;
  try {
    mutated = decode_link(raw);
  } catch (const DecodeError&) {
    out.mutated_rejected = true;
    return out;
  }
  LinkStore store = ms.store;
  auto mutated_ptr = std::make_shared<const HistoryLink>(std::move(mutated));
  store.insert_as(key, mutated_ptr);
  const HistoryLink& start = victim == head ? *mutated_ptr : *head;
  out.mutated_rejected = !verify_chain(start, ms.cred(owner), store, length, ms.swarm.central_key).accepted();
  return out;
}

}  // namespace swarmhist::testing
