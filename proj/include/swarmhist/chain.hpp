#pragma once

// Per-interval event lists and the signed, digest-linked history chain.
//
// A robot's link for interval t signs h(canonical_encode(E_t, t, prev)) where
// prev is the digest of its link for t-1 (all zeros before the first
// interval). Peers' previous links are referenced by digest and kept once in
// a content-addressed LinkStore instead of being copied into every link.
//
// Byte layout of canonical_encode (all integers big-endian):
//
//   "SWHL"            4 bytes magic
//   0x01              format version
//   t                 u32
//   prev              32 bytes
//   entry count       u32
//   per entry, ascending peer_id:
//     peer_id         u32
//     peer_link       32 bytes (all zeros: the peer's empty first history)
//     signature       u32 length + bytes
//     cred.robot_id   u32
//     cred.key        32 bytes
//     cred.cert       u32 length + bytes
//
// The empty list at t=1 with the genesis prev is therefore the 45 bytes
//   53 57 48 4c 01 00 00 00 01 <32 x 00> 00 00 00 00
//
// encode_link prepends the owner id (u32) and appends the owner signature
// (u32 length + bytes); digest_of(link) is SHA-256 of that encoding.

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "swarmhist/bytes.hpp"
#include "swarmhist/crypto.hpp"

namespace swarmhist {

using Interval = std::uint32_t;

inline constexpr std::size_t kMaxSignatureBytes = 1024;
inline constexpr std::size_t kMaxEntries = 1u << 20;

struct EventEntry {
  RobotId peer_id = 0;
  Digest peer_link_digest;
  Bytes peer_signature;
  Credential peer_credential;

  friend bool operator==(const EventEntry&, const EventEntry&) = default;
};

class EventList {
 public:
  EventList() = default;

  // Sorts entries by peer id. Throws InvalidParameter on a duplicate peer or
  // an entry naming the owner.
  static EventList make(RobotId owner, Interval t, std::vector<EventEntry> entries);
  static EventList empty(Interval t) { return EventList(t, {}); }

  Interval interval() const noexcept { return interval_; }
  const std::vector<EventEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool is_empty() const noexcept { return entries_.empty(); }

  const EventEntry* find(RobotId peer) const noexcept;
  bool contains(RobotId peer) const noexcept { return find(peer) != nullptr; }

  friend bool operator==(const EventList&, const EventList&) = default;

 private:
  EventList(Interval t, std::vector<EventEntry> entries) : interval_(t), entries_(std::move(entries)) {}

  Interval interval_ = 0;
  std::vector<EventEntry> entries_;
};

struct HistoryLink {
  RobotId owner_id = 0;
  Interval interval = 0;
  EventList events;
  Digest prev_digest;
  Bytes signature;

  friend bool operator==(const HistoryLink&, const HistoryLink&) = default;
};

using LinkPtr = std::shared_ptr<const HistoryLink>;

Bytes canonical_encode(const EventList& events, Interval t, const Digest& prev);
// Message signed by the owner: h(canonical_encode(events, interval, prev)).
Digest signed_hash(const HistoryLink& link);

Bytes encode_link(const HistoryLink& link);
// Strict inverse of encode_link: rejects trailing bytes, unsorted or
// duplicate entries and oversized length fields with DecodeError.
HistoryLink decode_link(ByteView bytes);
Digest digest_of(const HistoryLink& link);

// Message a robot signs to stand in for its empty history before interval 1.
Bytes genesis_message();
Bytes genesis_attestation(const SigningIdentity& identity);

class LinkStore {
 public:
  struct Record {
    Digest digest;  // digest_of(*link), computed on insertion
    LinkPtr link;
  };

  Digest insert(LinkPtr link);
  Digest insert(HistoryLink link) { return insert(std::make_shared<const HistoryLink>(std::move(link))); }
  // Loader path: files name the key each record is stored under. A record
  // whose content no longer hashes to its key is kept so verification can
  // report it as corrupt.
  void insert_as(const Digest& key, LinkPtr link);

  const Record* find(const Digest& key) const;
  LinkPtr get(const Digest& key) const;
  bool contains(const Digest& key) const { return find(key) != nullptr; }
  std::size_t size() const noexcept { return map_.size(); }

  // Records ordered by key.
  std::vector<std::pair<Digest, const Record*>> sorted() const;

 private:
  std::unordered_map<Digest, Record, DigestHasher> map_;
};

enum class RejectReason {
  none,
  owner_mismatch,
  bad_certificate,
  bad_signature,
  bad_entry,
  missing_link,
  digest_mismatch,
  interval_mismatch,
  interval_gap,
};

std::string_view to_string(RejectReason reason);

enum class EntryStatus { valid, invalid, unresolvable };

// Checks links and entries against the central key and a store, memoising
// certificate and signature results. One instance per thread.
class Verifier {
 public:
  Verifier(const PublicKey& central_key, const LinkStore& store) : central_key_(central_key), store_(&store) {}

  const PublicKey& central_key() const noexcept { return central_key_; }
  const LinkStore& store() const noexcept { return *store_; }

  bool certificate_ok(const Credential& credential) const;
  bool signature_ok(const PublicKey& key, const Digest& message, ByteView signature) const;

  // Owner id, owner certificate and owner signature; entries are not examined.
  RejectReason check_link_signature(const HistoryLink& link, const Credential& owner) const;
  // An entry in a link for `link_interval`: peer certificate, and the peer
  // signature against the referenced link (or the genesis message at t=1).
  EntryStatus check_entry(const EventEntry& entry, Interval link_interval) const;
  // Signature plus every entry. Unresolvable entries are tolerated only when
  // `require_resolvable` is false.
  RejectReason check_link(const HistoryLink& link, const Credential& owner, bool require_resolvable) const;

 private:
  PublicKey central_key_;
  const LinkStore* store_;
  mutable std::unordered_map<Digest, bool, DigestHasher> sig_cache_;
  mutable std::unordered_map<Digest, bool, DigestHasher> cert_cache_;
};

// What a peer hands over during an exchange: its credential plus its link for
// t-1, or (for t=1) its signed genesis attestation.
struct HistoryOffer {
  Credential credential;
  LinkPtr link;
  Bytes genesis_attestation;
};

// Keeps one entry per peer whose offer verifies; anything missing,
// mis-dated or failing verification is left out.
EventList build_event_list(RobotId owner, Interval t, std::span<const HistoryOffer> offers,
                           const Verifier& verifier);

// Signs the next link and stores it. `prev == nullptr` means genesis.
// Throws InvalidParameter unless events.interval() == prev->interval + 1
// (or 1 at genesis).
LinkPtr extend_history(const SigningIdentity& identity, const HistoryLink* prev, EventList events,
                       LinkStore& store);
// As extend_history, but for a robot returning after an absence: the new
// interval may skip past prev->interval + 1. verify_chain reports the skip
// as interval_gap.
LinkPtr resume_history(const SigningIdentity& identity, const HistoryLink* prev, EventList events,
                       LinkStore& store);

struct ChainVerdict {
  RejectReason reason = RejectReason::none;
  Interval interval = 0;  // first failing interval when rejected

  bool accepted() const noexcept { return reason == RejectReason::none; }
  explicit operator bool() const noexcept { return accepted(); }
};

// Checks the `depth` most recent links ending at `head`. Entries must resolve
// in the store once depth > 1. Throws InvalidParameter when depth == 0.
ChainVerdict verify_chain(const HistoryLink& head, const Credential& owner, std::size_t depth,
                          const Verifier& verifier);
ChainVerdict verify_chain(const HistoryLink& head, const Credential& owner, const LinkStore& store,
                          std::size_t depth, const PublicKey& central_key);

enum class Encounter { accepted, unpaired };

// Both links must be for the same interval.
Encounter accept_encounter(const HistoryLink& a, const HistoryLink& b);

}  // namespace swarmhist
