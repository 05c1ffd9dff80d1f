#include "swarmhist/chain.hpp"

#include <algorithm>
#include <array>

#include "swarmhist/error.hpp"

namespace swarmhist {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'S', 'W', 'H', 'L'};
constexpr std::uint8_t kFormatVersion = 1;

void write_entry(ByteWriter& w, const EventEntry& e) {
  w.u32(e.peer_id);
  w.raw(as_bytes(e.peer_link_digest));
  w.var(e.peer_signature);
  w.u32(e.peer_credential.robot_id);
  w.raw(e.peer_credential.verify_key);
  w.var(e.peer_credential.cert);
}

void write_canonical(ByteWriter& w, const EventList& events, Interval t, const Digest& prev) {
  w.raw(kMagic);
  w.u8(kFormatVersion);
  w.u32(t);
  w.raw(as_bytes(prev));
  w.u32(static_cast<std::uint32_t>(events.size()));
  for (const auto& e : events.entries()) write_entry(w, e);
}

Digest read_digest(ByteReader& r) {
  Digest d;
  auto raw = r.raw(kDigestSize);
  std::copy(raw.begin(), raw.end(), d.bytes.begin());
  return d;
}

LinkPtr make_link(const SigningIdentity& identity, const HistoryLink* prev, EventList events, LinkStore& store,
                  bool allow_gap) {
  const Interval t = events.interval();
  if (prev == nullptr) {
    if (t != 1 && !allow_gap) throw InvalidParameter("first link must be for interval 1", "interval");
    if (t == 0) throw InvalidParameter("interval must be at least 1", "interval");
  } else {
    if (prev->owner_id != identity.id()) throw InvalidParameter("previous link has a different owner", "prev");
    const bool next = t == prev->interval + 1;
    if (!next && !(allow_gap && t > prev->interval + 1)) {
      throw InvalidParameter("event list interval must follow the previous link", "interval");
    }
  }
  HistoryLink link;
  link.owner_id = identity.id();
  link.interval = t;
  link.events = std::move(events);
  link.prev_digest = prev == nullptr ? Digest::genesis() : digest_of(*prev);
  link.signature = identity.sign(as_bytes(signed_hash(link)));
  auto ptr = std::make_shared<const HistoryLink>(std::move(link));
  store.insert(ptr);
  return ptr;
}

}  // namespace

EventList EventList::make(RobotId owner, Interval t, std::vector<EventEntry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const EventEntry& a, const EventEntry& b) { return a.peer_id < b.peer_id; });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].peer_id == owner) throw InvalidParameter("event list may not name its owner", "peer_id");
    if (i > 0 && entries[i].peer_id == entries[i - 1].peer_id) {
      throw InvalidParameter("duplicate peer in event list", "peer_id");
    }
  }
  return EventList(t, std::move(entries));
}

const EventEntry* EventList::find(RobotId peer) const noexcept {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), peer,
                             [](const EventEntry& e, RobotId id) { return e.peer_id < id; });
  return it != entries_.end() && it->peer_id == peer ? &*it : nullptr;
}

Bytes canonical_encode(const EventList& events, Interval t, const Digest& prev) {
  ByteWriter w;
  write_canonical(w, events, t, prev);
  return std::move(w).take();
}

Digest signed_hash(const HistoryLink& link) {
  return hash(canonical_encode(link.events, link.interval, link.prev_digest));
}

Bytes encode_link(const HistoryLink& link) {
  ByteWriter w;
  w.u32(link.owner_id);
  write_canonical(w, link.events, link.interval, link.prev_digest);
  w.var(link.signature);
  return std::move(w).take();
}

HistoryLink decode_link(ByteView bytes) {
  ByteReader r(bytes);
  HistoryLink link;
  link.owner_id = r.u32();
  const auto magic_at = r.offset();
  auto magic = r.raw(kMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) throw DecodeError("bad link magic", magic_at);
  const auto version_at = r.offset();
  if (r.u8() != kFormatVersion) throw DecodeError("unsupported link format version", version_at);
  link.interval = r.u32();
  link.prev_digest = read_digest(r);
  const auto count_at = r.offset();
  const std::uint32_t count = r.u32();
  if (count > kMaxEntries) throw DecodeError("entry count exceeds limit", count_at);

  std::vector<EventEntry> entries;
  entries.reserve(std::min<std::uint32_t>(count, 64));
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto entry_at = r.offset();
    EventEntry e;
    e.peer_id = r.u32();
    e.peer_link_digest = read_digest(r);
    auto sig = r.var(kMaxSignatureBytes);
    e.peer_signature.assign(sig.begin(), sig.end());
    e.peer_credential.robot_id = r.u32();
    auto key = r.raw(kPublicKeySize);
    std::copy(key.begin(), key.end(), e.peer_credential.verify_key.begin());
    auto cert = r.var(kMaxSignatureBytes);
    e.peer_credential.cert.assign(cert.begin(), cert.end());
    if (!entries.empty() && entries.back().peer_id >= e.peer_id) {
      throw DecodeError("entries not in ascending peer order", entry_at);
    }
    if (e.peer_id == link.owner_id) throw DecodeError("entry names the link owner", entry_at);
    entries.push_back(std::move(e));
  }
  link.events = EventList::make(link.owner_id, link.interval, std::move(entries));
  auto sig = r.var(kMaxSignatureBytes);
  link.signature.assign(sig.begin(), sig.end());
  r.expect_done();
  return link;
}

Digest digest_of(const HistoryLink& link) { return hash(encode_link(link)); }

Bytes genesis_message() { return canonical_encode(EventList::empty(0), 0, Digest::genesis()); }

Bytes genesis_attestation(const SigningIdentity& identity) {
  return identity.sign(as_bytes(hash(genesis_message())));
}

Digest LinkStore::insert(LinkPtr link) {
  const Digest d = digest_of(*link);
  map_.try_emplace(d, Record{d, std::move(link)});
  return d;
}

void LinkStore::insert_as(const Digest& key, LinkPtr link) {
  const Digest actual = digest_of(*link);
  map_.insert_or_assign(key, Record{actual, std::move(link)});
}

const LinkStore::Record* LinkStore::find(const Digest& key) const {
  auto it = map_.find(key);
  return it == map_.end() ? nullptr : &it->second;
}

LinkPtr LinkStore::get(const Digest& key) const {
  const Record* rec = find(key);
  return rec == nullptr ? nullptr : rec->link;
}

std::vector<std::pair<Digest, const LinkStore::Record*>> LinkStore::sorted() const {
  std::vector<std::pair<Digest, const Record*>> out;
  out.reserve(map_.size());
  for (const auto& [k, v] : map_) out.emplace_back(k, &v);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::none: return "none";
    case RejectReason::owner_mismatch: return "owner_mismatch";
    case RejectReason::bad_certificate: return "bad_certificate";
    case RejectReason::bad_signature: return "bad_signature";
    case RejectReason::bad_entry: return "bad_entry";
    case RejectReason::missing_link: return "missing_link";
    case RejectReason::digest_mismatch: return "digest_mismatch";
    case RejectReason::interval_mismatch: return "interval_mismatch";
    case RejectReason::interval_gap: return "interval_gap";
  }
  return "unknown";
}

bool Verifier::certificate_ok(const Credential& credential) const {
  ByteWriter w;
  w.u32(credential.robot_id);
  w.raw(credential.verify_key);
  w.raw(credential.cert);
  const Digest key = hash(w.bytes());
  if (auto it = cert_cache_.find(key); it != cert_cache_.end()) return it->second;
  const bool ok = verify_certificate(credential, central_key_);
  cert_cache_.emplace(key, ok);
  return ok;
}

bool Verifier::signature_ok(const PublicKey& key, const Digest& message, ByteView signature) const {
  ByteWriter w;
  w.raw(key);
  w.raw(as_bytes(message));
  w.raw(signature);
  const Digest cache_key = hash(w.bytes());
  if (auto it = sig_cache_.find(cache_key); it != sig_cache_.end()) return it->second;
  const bool ok = verify_with_key(key, as_bytes(message), signature);
  sig_cache_.emplace(cache_key, ok);
  return ok;
}

RejectReason Verifier::check_link_signature(const HistoryLink& link, const Credential& owner) const {
  if (link.owner_id != owner.robot_id) return RejectReason::owner_mismatch;
  if (link.events.interval() != link.interval) return RejectReason::interval_mismatch;
  if (!certificate_ok(owner)) return RejectReason::bad_certificate;
  if (!signature_ok(owner.verify_key, signed_hash(link), link.signature)) return RejectReason::bad_signature;
  return RejectReason::none;
}

EntryStatus Verifier::check_entry(const EventEntry& entry, Interval link_interval) const {
  const Credential& peer = entry.peer_credential;
  if (entry.peer_id != peer.robot_id || !certificate_ok(peer)) return EntryStatus::invalid;
  if (entry.peer_link_digest.is_genesis()) {
    if (link_interval != 1) return EntryStatus::invalid;
    static const Digest genesis_hash = hash(genesis_message());
    return signature_ok(peer.verify_key, genesis_hash, entry.peer_signature) ? EntryStatus::valid
                                                                             : EntryStatus::invalid;
  }
  const LinkStore::Record* rec = store_->find(entry.peer_link_digest);
  if (rec == nullptr || rec->digest != entry.peer_link_digest) return EntryStatus::unresolvable;
  const HistoryLink& ref = *rec->link;
  if (ref.owner_id != entry.peer_id || ref.interval + 1 != link_interval) return EntryStatus::invalid;
  if (ref.signature != entry.peer_signature) return EntryStatus::invalid;
  return signature_ok(peer.verify_key, signed_hash(ref), entry.peer_signature) ? EntryStatus::valid
                                                                              : EntryStatus::invalid;
}

RejectReason Verifier::check_link(const HistoryLink& link, const Credential& owner, bool require_resolvable) const {
  if (auto r = check_link_signature(link, owner); r != RejectReason::none) return r;
  for (const auto& e : link.events.entries()) {
    switch (check_entry(e, link.interval)) {
      case EntryStatus::valid: break;
      case EntryStatus::invalid: return RejectReason::bad_entry;
      case EntryStatus::unresolvable:
        if (require_resolvable) return RejectReason::missing_link;
        break;
    }
  }
  return RejectReason::none;
}

EventList build_event_list(RobotId owner, Interval t, std::span<const HistoryOffer> offers,
                           const Verifier& verifier) {
  static const Digest genesis_hash = hash(genesis_message());
  std::vector<EventEntry> entries;
  entries.reserve(offers.size());
  for (const auto& offer : offers) {
    const RobotId peer = offer.credential.robot_id;
    if (peer == owner) continue;
    if (std::any_of(entries.begin(), entries.end(), [&](const EventEntry& e) { return e.peer_id == peer; })) {
      continue;
    }
    if (t == 1) {
      if (offer.link) continue;
      if (!verifier.certificate_ok(offer.credential) ||
          !verifier.signature_ok(offer.credential.verify_key, genesis_hash, offer.genesis_attestation)) {
        continue;
      }
      entries.push_back({peer, Digest::genesis(), offer.genesis_attestation, offer.credential});
      continue;
    }
    if (!offer.link || offer.link->interval + 1 != t) continue;
    if (verifier.check_link(*offer.link, offer.credential, false) != RejectReason::none) continue;
    entries.push_back({peer, digest_of(*offer.link), offer.link->signature, offer.credential});
  }
  return EventList::make(owner, t, std::move(entries));
}

LinkPtr extend_history(const SigningIdentity& identity, const HistoryLink* prev, EventList events,
                       LinkStore& store) {
  return make_link(identity, prev, std::move(events), store, false);
}

LinkPtr resume_history(const SigningIdentity& identity, const HistoryLink* prev, EventList events,
                       LinkStore& store) {
  return make_link(identity, prev, std::move(events), store, true);
}

ChainVerdict verify_chain(const HistoryLink& head, const Credential& owner, std::size_t depth,
                          const Verifier& verifier) {
  if (depth == 0) throw InvalidParameter("verification depth must be at least 1", "depth");
  const bool require_resolvable = depth > 1;
  const HistoryLink* link = &head;
  LinkPtr hold;
  for (std::size_t level = 0; level < depth; ++level) {
    if (auto r = verifier.check_link(*link, owner, require_resolvable); r != RejectReason::none) {
      return {r, link->interval};
    }
    if (level + 1 == depth) break;
    if (link->prev_digest.is_genesis()) {
      if (link->interval != 1) return {RejectReason::interval_gap, link->interval};
      break;
    }
    const Interval expected = link->interval - 1;
    const LinkStore::Record* rec = verifier.store().find(link->prev_digest);
    if (rec == nullptr) return {RejectReason::missing_link, expected};
    if (rec->digest != link->prev_digest) return {RejectReason::digest_mismatch, expected};
    const HistoryLink& prev = *rec->link;
    if (prev.interval >= link->interval) return {RejectReason::interval_mismatch, link->interval};
    if (prev.interval != expected) return {RejectReason::interval_gap, link->interval};
    hold = rec->link;
    link = hold.get();
  }
  return {};
}

ChainVerdict verify_chain(const HistoryLink& head, const Credential& owner, const LinkStore& store,
                          std::size_t depth, const PublicKey& central_key) {
  const Verifier verifier(central_key, store);
  return verify_chain(head, owner, depth, verifier);
}

Encounter accept_encounter(const HistoryLink& a, const HistoryLink& b) {
  if (a.interval != b.interval) throw InvalidParameter("links must be for the same interval", "interval");
  return a.events.contains(b.owner_id) && b.events.contains(a.owner_id) ? Encounter::accepted : Encounter::unpaired;
}

}  // namespace swarmhist
