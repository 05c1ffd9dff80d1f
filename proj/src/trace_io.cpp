#include "swarmhist/trace_io.hpp"

#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "swarmhist/error.hpp"

namespace swarmhist {

using nlohmann::json;

namespace {

const std::set<std::string> kConfigKeys{"version", "n",       "p",    "intervals",  "delta",
                                        "alpha",   "window",  "epsilon", "seed", "adversaries",
                                        "local_revocation", "montecarlo"};
const std::set<std::string> kAdversaryKeys{"behavior", "robots", "from", "to", "target"};

template <typename T>
T field(const json& j, const std::string& key, const std::string& path) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidParameter("missing or mistyped field '" + path + "'", path);
  }
}

template <typename T>
T field_or(const json& j, const std::string& key, const std::string& path, T fallback) {
  if (!j.contains(key)) return fallback;
  return field<T>(j, key, path);
}

std::uint32_t u32_field(const json& j, const std::string& key, const std::string& path) {
  const json& v = j.contains(key) ? j.at(key) : json();
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0 || v.get<std::int64_t>() > 0xffffffffLL) {
    throw InvalidParameter("field '" + path + "' must be a non-negative integer", path);
  }
  return v.get<std::uint32_t>();
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& prefix) {
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw InvalidParameter("unknown field '" + prefix + key + "'", prefix + key);
  }
}

Digest digest_from_hex(const std::string& hex, std::size_t pos) {
  const Bytes raw = from_hex(hex);
  if (raw.size() != kDigestSize) throw DecodeError("digest must be 32 bytes", pos);
  Digest d;
  std::copy(raw.begin(), raw.end(), d.bytes.begin());
  return d;
}

// Wraps any failure while decoding a record with its location.
template <typename F>
auto at_record(const std::string& where, std::size_t index, F&& f) {
  try {
    return f();
  } catch (const DecodeError& e) {
    throw DecodeError(where + "[" + std::to_string(index) + "]: " + e.what(), index);
  } catch (const json::exception& e) {
    throw DecodeError(where + "[" + std::to_string(index) + "]: " + e.what(), index);
  } catch (const InvalidParameter& e) {
    throw DecodeError(where + "[" + std::to_string(index) + "]: " + e.what(), index);
  }
}

json credential_to_json(const Credential& c) {
  return {{"robot_id", c.robot_id}, {"verify_key", to_hex(c.verify_key)}, {"cert", to_hex(c.cert)}};
}

Credential credential_from_json(const json& j, std::size_t pos) {
  Credential c;
  c.robot_id = j.at("robot_id").get<RobotId>();
  const Bytes key = from_hex(j.at("verify_key").get<std::string>());
  if (key.size() != kPublicKeySize) throw DecodeError("verify_key must be 32 bytes", pos);
  std::copy(key.begin(), key.end(), c.verify_key.begin());
  c.cert = from_hex(j.at("cert").get<std::string>());
  return c;
}

}  // namespace

SimConfig config_from_json(const json& j) {
  if (!j.is_object()) throw InvalidParameter("config must be a JSON object", "config");
  reject_unknown(j, kConfigKeys, "");
  if (j.contains("version") && field<int>(j, "version", "version") != kConfigVersion) {
    throw InvalidParameter("unsupported config version", "version");
  }
  SimConfig c;
  c.n = u32_field(j, "n", "n");
  if (!j.contains("p") || !j.at("p").is_number()) throw InvalidParameter("field 'p' must be a number", "p");
  c.p = j.at("p").get<double>();
  c.intervals = u32_field(j, "intervals", "intervals");
  if (j.contains("delta")) c.delta = u32_field(j, "delta", "delta");
  c.alpha = field_or<double>(j, "alpha", "alpha", 0.0);
  if (j.contains("window")) c.window = u32_field(j, "window", "window");
  c.epsilon = field_or<double>(j, "epsilon", "epsilon", 0.05);
  c.seed = field_or<std::uint64_t>(j, "seed", "seed", 0);
  c.local_revocation = field_or<bool>(j, "local_revocation", "local_revocation", false);
  if (j.contains("adversaries")) {
    const json& list = j.at("adversaries");
    if (!list.is_array()) throw InvalidParameter("field 'adversaries' must be an array", "adversaries");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string prefix = "adversaries[" + std::to_string(i) + "].";
      const json& a = list[i];
      if (!a.is_object()) throw InvalidParameter("adversary entry must be an object", prefix);
      reject_unknown(a, kAdversaryKeys, prefix);
      AdversaryProfile prof;
      try {
        prof.behavior = behavior_from_string(field<std::string>(a, "behavior", prefix + "behavior"));
      } catch (const InvalidParameter& e) {
        throw InvalidParameter(e.what(), prefix + "behavior");
      }
      prof.robots = field<std::vector<RobotId>>(a, "robots", prefix + "robots");
      if (a.contains("from")) prof.from = u32_field(a, "from", prefix + "from");
      if (a.contains("to")) prof.to = u32_field(a, "to", prefix + "to");
      if (a.contains("target")) prof.target = u32_field(a, "target", prefix + "target");
      c.adversaries.push_back(std::move(prof));
    }
  }
  validate(c);
  return c;
}

json config_to_json(const SimConfig& c) {
  json j{{"version", kConfigVersion}, {"n", c.n},         {"p", c.p},
         {"intervals", c.intervals},  {"delta", c.delta}, {"alpha", c.alpha},
         {"window", c.chain_window()}, {"epsilon", c.epsilon}, {"seed", c.seed},
         {"local_revocation", c.local_revocation}};
  json adv = json::array();
  for (const auto& a : c.adversaries) {
    json e{{"behavior", std::string(to_string(a.behavior))}, {"robots", a.robots}};
    if (a.behavior == Behavior::disappear) {
      e["from"] = a.from;
      e["to"] = a.to;
    }
    if (a.behavior == Behavior::forge_claim) e["target"] = a.target;
    adv.push_back(std::move(e));
  }
  j["adversaries"] = std::move(adv);
  return j;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidParameter("cannot read file '" + path.string() + "'", "config");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidParameter("JSON syntax error in '" + path.string() + "' at byte " + std::to_string(e.byte), "config");
  }
}

MonteCarloSettings montecarlo_from_json(const json& j) {
  MonteCarloSettings s;
  if (!j.contains("montecarlo")) return s;
  const json& m = j.at("montecarlo");
  if (!m.is_object()) throw InvalidParameter("field 'montecarlo' must be an object", "montecarlo");
  reject_unknown(m, {"suites", "tolerance", "runs"}, "montecarlo.");
  s.suites = field_or<std::vector<std::string>>(m, "suites", "montecarlo.suites", s.suites);
  for (const auto& name : s.suites) {
    if (name != "report_within" && name != "framing" && name != "collusion") {
      throw InvalidParameter("unknown suite '" + name + "'", "montecarlo.suites");
    }
  }
  s.tolerance = field_or<double>(m, "tolerance", "montecarlo.tolerance", s.tolerance);
  if (!(s.tolerance >= 0.0)) throw InvalidParameter("tolerance must be non-negative", "montecarlo.tolerance");
  s.runs = field_or<std::size_t>(m, "runs", "montecarlo.runs", s.runs);
  if (s.runs < 1) throw InvalidParameter("runs must be at least 1", "montecarlo.runs");
  return s;
}

json manifest_to_json(const RunManifest& m) {
  return {{"tool", std::string(kToolName)}, {"version", std::string(kToolVersion)},
          {"command", m.command},           {"config_path", m.config_path},
          {"seed", m.seed},                 {"config", config_to_json(m.config)},
          {"outputs", m.outputs}};
}

std::string trace_to_string(const SimTrace& trace, const RunManifest& manifest) {
  json j;
  j["format"] = std::string(kTraceFormat);
  j["version"] = kTraceVersion;
  j["manifest"] = manifest_to_json(manifest);
  j["config"] = config_to_json(trace.config);
  j["central_key"] = to_hex(trace.central_key);

  json creds = json::array();
  for (const auto& c : trace.credentials) creds.push_back(credential_to_json(c));
  j["credentials"] = std::move(creds);

  json graphs = json::array();
  for (const auto& g : trace.graphs) {
    json edges = json::array();
    for (const auto& e : g.edges()) edges.push_back({e.u, e.v});
    graphs.push_back({{"interval", g.interval()}, {"edges", std::move(edges)}});
  }
  j["graphs"] = std::move(graphs);

  json links = json::array();
  for (const auto& [key, rec] : trace.store.sorted()) {
    links.push_back({{"digest", to_hex(as_bytes(key))}, {"link", to_hex(encode_link(*rec->link))}});
  }
  j["links"] = std::move(links);

  json heads = json::array();
  for (const auto& [robot, digest] : trace.heads) heads.push_back({{"robot", robot}, {"digest", to_hex(as_bytes(digest))}});
  j["heads"] = std::move(heads);

  json log = json::array();
  for (const auto& r : trace.log) {
    log.push_back({{"t", r.interval}, {"from", r.from}, {"to", r.to}, {"outcome", std::string(to_string(r.outcome))}});
  }
  j["exchanges"] = std::move(log);
  return j.dump(1) + "\n";
}

LoadedTrace trace_from_string(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DecodeError(std::string("trace is not valid JSON: ") + e.what(), e.byte);
  }
  auto require = [&](const char* key) -> const json& {
    if (!j.is_object() || !j.contains(key)) throw DecodeError(std::string("trace lacks '") + key + "'", 0);
    return j.at(key);
  };
  if (require("format") != kTraceFormat) throw DecodeError("not a swarmhist trace", 0);
  if (require("version") != kTraceVersion) throw DecodeError("unsupported trace version", 0);

  LoadedTrace out;
  out.manifest = require("manifest");
  SimTrace& t = out.trace;
  try {
    t.config = config_from_json(require("config"));
  } catch (const InvalidParameter& e) {
    throw DecodeError(std::string("config: ") + e.what(), 0);
  }
  {
    const Bytes key = from_hex(require("central_key").get<std::string>());
    if (key.size() != kPublicKeySize) throw DecodeError("central_key must be 32 bytes", 0);
    std::copy(key.begin(), key.end(), t.central_key.begin());
  }
  const json& creds = require("credentials");
  for (std::size_t i = 0; i < creds.size(); ++i) {
    t.credentials.push_back(at_record("credentials", i, [&] {
      Credential c = credential_from_json(creds[i], i);
      if (c.robot_id != i + 1) throw DecodeError("credentials out of order", i);
      return c;
    }));
  }
  if (t.credentials.size() != t.config.n) throw DecodeError("credential count does not match n", creds.size());

  const json& graphs = require("graphs");
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    t.graphs.push_back(at_record("graphs", i, [&] {
      std::vector<Edge> edges;
      for (const auto& e : graphs[i].at("edges")) edges.push_back({e.at(0).get<RobotId>(), e.at(1).get<RobotId>()});
      return EncounterGraph::from_edges(t.config.n, graphs[i].at("interval").get<Interval>(), std::move(edges));
    }));
  }
  const json& links = require("links");
  for (std::size_t i = 0; i < links.size(); ++i) {
    at_record("links", i, [&] {
      const Digest key = digest_from_hex(links[i].at("digest").get<std::string>(), i);
      const Bytes raw = from_hex(links[i].at("link").get<std::string>());
      t.store.insert_as(key, std::make_shared<const HistoryLink>(decode_link(raw)));
      return 0;
    });
  }
  const json& heads = require("heads");
  for (std::size_t i = 0; i < heads.size(); ++i) {
    at_record("heads", i, [&] {
      const auto robot = heads[i].at("robot").get<RobotId>();
      if (robot < 1 || robot > t.config.n) throw DecodeError("head robot out of range", i);
      t.heads[robot] = digest_from_hex(heads[i].at("digest").get<std::string>(), i);
      return 0;
    });
  }
  const json& log = require("exchanges");
  for (std::size_t i = 0; i < log.size(); ++i) {
    t.log.push_back(at_record("exchanges", i, [&] {
      const json& r = log[i];
      return ExchangeRecord{r.at("t").get<Interval>(), r.at("from").get<RobotId>(), r.at("to").get<RobotId>(),
                            exchange_outcome_from_string(r.at("outcome").get<std::string>())};
    }));
  }
  return out;
}

json to_json(const SuspicionReport& r) {
  json disappeared = json::array();
  for (const auto& s : r.disappeared) {
    disappeared.push_back({{"robot", s.robot}, {"last_seen", s.last_seen ? json(*s.last_seen) : json(nullptr)}});
  }
  json unpaired = json::array();
  for (const auto& u : r.unpaired_claims) {
    unpaired.push_back({{"claimer", u.claimer}, {"target", u.target}, {"interval", u.interval}});
  }
  json collusion = json::array();
  for (const auto& c : r.collusion_suspects) {
    collusion.push_back({{"pair", {c.a, c.b}}, {"run", c.run}, {"probability", c.probability}});
  }
  json pairing = json::array();
  for (const auto& [robot, v] : r.pairing_suspects) {
    pairing.push_back({{"robot", robot},
                       {"paired", v.paired},
                       {"charged_unpaired", v.charged_unpaired},
                       {"excused_unpaired", v.excused_unpaired},
                       {"required", v.required},
                       {"intervals_examined", v.intervals_examined}});
  }
  return {{"observer", r.observer},
          {"as_of", r.as_of},
          {"delta", r.delta},
          {"history_sufficient", r.history_sufficient},
          {"disappeared", std::move(disappeared)},
          {"unpaired_claims", std::move(unpaired)},
          {"collusion_suspects", std::move(collusion)},
          {"pairing_suspects", std::move(pairing)},
          {"revoked", r.revoked}};
}

json to_json(const AuditReport& r) {
  json failures = json::array();
  for (const auto& f : r.failures) {
    failures.push_back({{"robot", f.robot}, {"interval", f.interval}, {"reason", std::string(to_string(f.reason))}});
  }
  json unpaired = json::array();
  for (const auto& u : r.unpaired) {
    unpaired.push_back({{"claimer", u.claimer},
                        {"target", u.target},
                        {"interval", u.interval},
                        {"attributed_to", u.attributed_to},
                        {"cause", std::string(to_string(u.cause))}});
  }
  json gaps = json::array();
  for (const auto& g : r.gaps) gaps.push_back({{"robot", g.robot}, {"from", g.from}, {"to", g.to}});
  return {{"intervals", r.intervals},
          {"links_verified", r.links_verified},
          {"findings", r.findings()},
          {"verification_failures", std::move(failures)},
          {"unpaired_claims", std::move(unpaired)},
          {"disappearance_gaps", std::move(gaps)},
          {"paired_encounters", r.encounters.size()}};
}

json to_json(const Estimate& e) {
  return {{"point", e.point}, {"trials", e.trials}, {"successes", e.successes}, {"std_error", e.std_error}, {"seed", e.seed}};
}

}  // namespace swarmhist
