#include "swarmhist/sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "swarmhist/detect.hpp"
#include "swarmhist/error.hpp"
#include "swarmhist/rng.hpp"

namespace swarmhist {

namespace {

struct Role {
  bool refuse_record = false;
  std::set<RobotId> record_group;  // peers a refuse_record robot still records
  bool refuse_give = false;
  std::vector<RobotId> colluders;
  std::vector<RobotId> forge_targets;
};

bool has_entry(const std::vector<EventEntry>& entries, RobotId peer) {
  return std::any_of(entries.begin(), entries.end(), [&](const EventEntry& e) { return e.peer_id == peer; });
}

std::string profile_field(std::size_t i, const char* name) {
  return "adversaries[" + std::to_string(i) + "]." + name;
}

}  // namespace

std::string_view to_string(Behavior b) {
  switch (b) {
    case Behavior::refuse_record: return "refuse_record";
    case Behavior::refuse_give: return "refuse_give";
    case Behavior::disappear: return "disappear";
    case Behavior::collude: return "collude";
    case Behavior::forge_claim: return "forge_claim";
  }
  return "unknown";
}

Behavior behavior_from_string(std::string_view s) {
  for (auto b : {Behavior::refuse_record, Behavior::refuse_give, Behavior::disappear, Behavior::collude,
                 Behavior::forge_claim}) {
    if (to_string(b) == s) return b;
  }
  throw InvalidParameter("unknown adversary behavior '" + std::string(s) + "'", "behavior");
}

std::string_view to_string(ExchangeOutcome o) {
  switch (o) {
    case ExchangeOutcome::given: return "given";
    case ExchangeOutcome::withheld: return "withheld";
    case ExchangeOutcome::omitted: return "omitted";
    case ExchangeOutcome::rejected: return "rejected";
    case ExchangeOutcome::fabricated: return "fabricated";
    case ExchangeOutcome::forged: return "forged";
    case ExchangeOutcome::ignored: return "ignored";
  }
  return "unknown";
}

ExchangeOutcome exchange_outcome_from_string(std::string_view s) {
  for (auto o : {ExchangeOutcome::given, ExchangeOutcome::withheld, ExchangeOutcome::omitted,
                 ExchangeOutcome::rejected, ExchangeOutcome::fabricated, ExchangeOutcome::forged,
                 ExchangeOutcome::ignored}) {
    if (to_string(o) == s) return o;
  }
  throw InvalidParameter("unknown exchange outcome '" + std::string(s) + "'", "outcome");
}

void validate(const SimConfig& c) {
  if (c.n < 1) throw InvalidParameter("n must be at least 1", "n");
  if (!(c.p >= 0.0 && c.p <= 1.0)) throw InvalidParameter("p must lie in [0, 1]", "p");
  if (c.intervals < 1) throw InvalidParameter("intervals must be at least 1", "intervals");
  if (c.delta < 1 || c.delta > c.intervals) throw InvalidParameter("delta must lie in [1, intervals]", "delta");
  if (!(c.alpha >= 0.0 && c.alpha < 1.0)) throw InvalidParameter("alpha must lie in [0, 1)", "alpha");
  if (c.window && *c.window < 1) throw InvalidParameter("window must be at least 1", "window");
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw InvalidParameter("epsilon must lie in (0, 1)", "epsilon");

  for (std::size_t i = 0; i < c.adversaries.size(); ++i) {
    const auto& a = c.adversaries[i];
    if (a.robots.empty()) throw InvalidParameter("adversary profile lists no robots", profile_field(i, "robots"));
    for (auto r : a.robots) {
      if (r < 1 || r > c.n) throw InvalidParameter("adversary robot id out of range", profile_field(i, "robots"));
    }
    switch (a.behavior) {
      case Behavior::disappear:
        if (a.from < 1 || a.from > a.to || a.to > c.intervals) {
          throw InvalidParameter("disappearance window must satisfy 1 <= from <= to <= intervals",
                                 profile_field(i, a.to > c.intervals ? "to" : "from"));
        }
        break;
      case Behavior::forge_claim:
        if (a.target < 1 || a.target > c.n) {
          throw InvalidParameter("forge target out of range", profile_field(i, "target"));
        }
        if (std::find(a.robots.begin(), a.robots.end(), a.target) != a.robots.end()) {
          throw InvalidParameter("forge target must not be one of the forgers", profile_field(i, "target"));
        }
        break;
      case Behavior::collude:
        if (std::set<RobotId>(a.robots.begin(), a.robots.end()).size() < 2) {
          throw InvalidParameter("collusion needs at least two robots", profile_field(i, "robots"));
        }
        break;
      case Behavior::refuse_record:
      case Behavior::refuse_give:
        break;
    }
  }
  const auto bad = adversary_ids(c);
  if (static_cast<double>(bad.size()) > c.alpha * static_cast<double>(c.n) + 1e-9) {
    throw InvalidParameter("adversary count exceeds alpha * n", "alpha");
  }
}

std::set<RobotId> adversary_ids(const SimConfig& config) {
  std::set<RobotId> out;
  for (const auto& a : config.adversaries) out.insert(a.robots.begin(), a.robots.end());
  return out;
}

std::vector<bool> apply_disappearance(std::span<const AdversaryProfile> profiles, std::size_t n, Interval t) {
  std::vector<bool> active(n + 1, true);
  active[0] = false;
  for (const auto& a : profiles) {
    if (a.behavior != Behavior::disappear || t < a.from || t > a.to) continue;
    for (auto r : a.robots) {
      if (r >= 1 && r <= n) active[r] = false;
    }
  }
  return active;
}

struct Simulation::State {
  SimConfig config;
  ProvisionedSwarm swarm;
  std::vector<Bytes> genesis;  // by id
  std::vector<Role> roles;     // by id
  SimTrace trace;
  std::unique_ptr<Verifier> verifier;
  std::vector<LinkPtr> heads;     // by id
  std::vector<LinkPtr> snapshot;  // heads at interval start (Hist^{t-1})
  Interval t = 0;
  bool in_interval = false;
  EncounterGraph graph;
  std::vector<bool> active;
  std::set<std::pair<RobotId, RobotId>> exchanged;
  std::vector<std::vector<EventEntry>> pending;
  std::vector<std::set<RobotId>> revoked;
  std::map<std::pair<RobotId, RobotId>, HistoryOffer> forgeries;  // (forger, target) this interval

  const Credential& cred(RobotId r) const { return swarm.identities[r - 1].credential(); }

  HistoryOffer offer_of(RobotId r) const {
    const auto& link = snapshot[r];
    return HistoryOffer{cred(r), link, link ? Bytes{} : genesis[r]};
  }

  // The forger cannot sign as the target, so it signs the fake history itself.
  const HistoryOffer& forged_offer(RobotId forger, RobotId target) {
    auto key = std::make_pair(forger, target);
    if (auto it = forgeries.find(key); it != forgeries.end()) return it->second;
    const auto& me = swarm.identities[forger - 1];
    HistoryOffer offer{cred(target), nullptr, {}};
    if (t == 1) {
      offer.genesis_attestation = me.sign(as_bytes(hash(genesis_message())));
    } else {
      HistoryLink fake;
      fake.owner_id = target;
      fake.interval = t - 1;
      fake.events = EventList::empty(t - 1);
      fake.prev_digest = Digest::genesis();
      fake.signature = me.sign(as_bytes(signed_hash(fake)));
      auto ptr = std::make_shared<const HistoryLink>(std::move(fake));
      trace.store.insert(ptr);
      offer.link = std::move(ptr);
    }
    return forgeries.emplace(key, std::move(offer)).first->second;
  }

  // Receiver-side handling of one offer; returns what happened to it.
  ExchangeOutcome receive(RobotId from, RobotId to, const HistoryOffer& offer) {
    const Role& role = roles[to];
    if (role.refuse_give) return ExchangeOutcome::omitted;
    if (role.refuse_record && !role.record_group.contains(from)) return ExchangeOutcome::omitted;
    if (revoked[to].contains(from)) return ExchangeOutcome::ignored;
    if (has_entry(pending[to], from)) return ExchangeOutcome::rejected;
    const EventList got = build_event_list(to, t, std::span(&offer, 1), *verifier);
    if (got.size() != 1) return ExchangeOutcome::rejected;
    pending[to].push_back(got.entries().front());
    return ExchangeOutcome::given;
  }

  void log(RobotId from, RobotId to, ExchangeOutcome o) { trace.log.push_back({t, from, to, o}); }
};

Simulation::Simulation(SimConfig config) : state_(std::make_unique<State>()) {
  validate(config);
  auto& s = *state_;
  s.config = std::move(config);
  const auto n = s.config.n;
  s.swarm = provision_swarm(n, s.config.seed);
  s.genesis.assign(n + 1, {});
  s.roles.assign(n + 1, {});
  s.heads.assign(n + 1, nullptr);
  s.snapshot.assign(n + 1, nullptr);
  s.pending.assign(n + 1, {});
  s.revoked.assign(n + 1, {});
  for (const auto& id : s.swarm.identities) {
    s.genesis[id.id()] = genesis_attestation(id);
    s.trace.credentials.push_back(id.credential());
  }
  for (const auto& a : s.config.adversaries) {
    for (auto r : a.robots) {
      Role& role = s.roles[r];
      switch (a.behavior) {
        case Behavior::refuse_record:
          role.refuse_record = true;
          role.record_group.insert(a.robots.begin(), a.robots.end());
          break;
        case Behavior::refuse_give: role.refuse_give = true; break;
        case Behavior::disappear: break;
        case Behavior::collude:
          for (auto q : a.robots) {
            if (q != r && std::find(role.colluders.begin(), role.colluders.end(), q) == role.colluders.end()) {
              role.colluders.push_back(q);
            }
          }
          std::sort(role.colluders.begin(), role.colluders.end());
          break;
        case Behavior::forge_claim: role.forge_targets.push_back(a.target); break;
      }
    }
  }
  s.trace.config = s.config;
  s.trace.central_key = s.swarm.central_key;
  s.verifier = std::make_unique<Verifier>(s.swarm.central_key, s.trace.store);
}

Simulation::~Simulation() = default;
Simulation::Simulation(Simulation&&) noexcept = default;
Simulation& Simulation::operator=(Simulation&&) noexcept = default;

void Simulation::begin_interval() {
  auto& s = *state_;
  if (s.in_interval) throw ContractViolation("previous interval has not ended");
  if (s.t >= s.config.intervals) throw ContractViolation("simulation already covers every interval");
  ++s.t;
  Rng rng(derive_seed(s.config.seed, {kGraphStream, s.t}));
  const EncounterGraph sampled = gen_interval_graph(s.config.n, s.config.p, s.t, rng);
  s.active = apply_disappearance(s.config.adversaries, s.config.n, s.t);
  s.graph = sampled.restricted_to(s.active);
  s.snapshot = s.heads;
  for (auto& p : s.pending) p.clear();
  s.exchanged.clear();
  s.forgeries.clear();
  s.in_interval = true;
}

std::pair<ExchangeOutcome, ExchangeOutcome> Simulation::exchange(RobotId i, RobotId j) {
  auto& s = *state_;
  if (!s.in_interval) throw ContractViolation("exchange outside an interval");
  if (!s.graph.has_edge(i, j)) throw ContractViolation("robots did not meet in this interval");
  if (!s.exchanged.insert(std::minmax(i, j)).second) {
    throw ContractViolation("pair already exchanged histories in this interval");
  }
  ExchangeOutcome out[2];
  const RobotId pair[2][2] = {{i, j}, {j, i}};
  for (int k = 0; k < 2; ++k) {
    const RobotId from = pair[k][0];
    const RobotId to = pair[k][1];
    out[k] = s.roles[from].refuse_give ? ExchangeOutcome::withheld : s.receive(from, to, s.offer_of(from));
    s.log(from, to, out[k]);
    // A forger also tries to pass off the target's history to whoever it meets.
    for (auto target : s.roles[from].forge_targets) {
      if (target == to) continue;
      const HistoryOffer& forged = s.forged_offer(from, target);
      const EventList got = build_event_list(to, s.t, std::span(&forged, 1), *s.verifier);
      if (got.size() == 1 && !has_entry(s.pending[to], target)) {
        s.pending[to].push_back(got.entries().front());
        s.log(target, to, ExchangeOutcome::given);
      } else {
        s.log(target, to, ExchangeOutcome::forged);
      }
    }
  }
  return {out[0], out[1]};
}

void Simulation::end_interval() {
  auto& s = *state_;
  if (!s.in_interval) throw ContractViolation("no interval in progress");
  const Interval t = s.t;
  for (RobotId r = 1; r <= s.config.n; ++r) {
    if (!s.active[r]) continue;
    auto& entries = s.pending[r];
    for (auto q : s.roles[r].colluders) {
      if (has_entry(entries, q)) continue;
      const auto& link = s.snapshot[q];
      if (t == 1) {
        entries.push_back({q, Digest::genesis(), s.genesis[q], s.cred(q)});
      } else if (link && link->interval + 1 == t) {
        entries.push_back({q, digest_of(*link), link->signature, s.cred(q)});
      } else {
        continue;
      }
      s.log(q, r, ExchangeOutcome::fabricated);
    }
    for (auto target : s.roles[r].forge_targets) {
      if (has_entry(entries, target)) continue;
      const HistoryOffer& forged = s.forged_offer(r, target);
      entries.push_back({target, forged.link ? digest_of(*forged.link) : Digest::genesis(),
                         forged.link ? forged.link->signature : forged.genesis_attestation, s.cred(target)});
      s.log(target, r, ExchangeOutcome::forged);
    }
    EventList events = EventList::make(r, t, std::move(entries));
    const auto& id = s.swarm.identities[r - 1];
    const HistoryLink* prev = s.heads[r].get();
    const bool contiguous = prev == nullptr ? t == 1 : prev->interval + 1 == t;
    s.heads[r] = contiguous ? extend_history(id, prev, std::move(events), s.trace.store)
                            : resume_history(id, prev, std::move(events), s.trace.store);
    s.trace.heads[r] = digest_of(*s.heads[r]);
  }
  s.trace.graphs.push_back(s.graph);

  if (s.config.local_revocation && t >= s.config.delta) {
    const DetectionParams params{s.config.delta, s.config.alpha, s.config.epsilon, s.config.n, s.config.p};
    for (RobotId r = 1; r <= s.config.n; ++r) {
      if (!s.active[r]) continue;
      const LocalView view = build_local_view(*s.heads[r], s.cred(r), s.config.n, s.config.chain_window(), *s.verifier);
      const SuspicionReport report = analyze_view(view, params);
      s.revoked[r].insert(report.revoked.begin(), report.revoked.end());
    }
  }
  s.in_interval = false;
}

void Simulation::run() {
  while (state_->t < state_->config.intervals) {
    begin_interval();
    for (const auto& e : state_->graph.edges()) exchange(e.u, e.v);
    end_interval();
  }
}

Interval Simulation::current_interval() const noexcept { return state_->t; }
const EncounterGraph& Simulation::current_graph() const { return state_->graph; }
const std::vector<bool>& Simulation::active() const noexcept { return state_->active; }

LinkPtr Simulation::head(RobotId r) const {
  if (r < 1 || r > state_->config.n) throw InvalidParameter("robot id out of range", "robot");
  return state_->heads[r];
}

const SigningIdentity& Simulation::identity(RobotId r) const {
  if (r < 1 || r > state_->config.n) throw InvalidParameter("robot id out of range", "robot");
  return state_->swarm.identities[r - 1];
}

const std::set<RobotId>& Simulation::revoked_by(RobotId r) const {
  if (r < 1 || r > state_->config.n) throw InvalidParameter("robot id out of range", "robot");
  return state_->revoked[r];
}

const SimTrace& Simulation::trace() const noexcept { return state_->trace; }

SimTrace Simulation::finish() && {
  if (state_->in_interval) throw ContractViolation("interval still in progress");
  return std::move(state_->trace);
}

SimTrace run_simulation(const SimConfig& config) {
  Simulation sim(config);
  sim.run();
  return std::move(sim).finish();
}

}  // namespace swarmhist
