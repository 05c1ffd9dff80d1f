// swarmhist command-line front end: simulate, analyze, prob, montecarlo.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "swarmhist/audit.hpp"
#include "swarmhist/detect.hpp"
#include "swarmhist/error.hpp"
#include "swarmhist/prob.hpp"
#include "swarmhist/sim.hpp"
#include "swarmhist/suites.hpp"
#include "swarmhist/trace_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace swarmhist;

namespace {

enum class Format { human, machine };

struct Options {
  std::string config_path;
  std::string trace_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<Interval> delta;
  std::optional<double> alpha;
  std::optional<double> epsilon;
  std::optional<std::size_t> n;
  std::optional<double> p;
  std::string output;
  Format format = Format::human;
};

// Sink for report records: stdout in the selected format, plus the optional
// output file which always receives JSON lines.
class Emitter {
 public:
  Emitter(Format format, const std::string& output) : format_(format) {
    if (!output.empty()) {
      file_.open(output, std::ios::binary | std::ios::trunc);
      if (!file_) throw InvalidParameter("cannot write '" + output + "'", "output");
    }
  }

  void record(const std::string& kind, json body) {
    body["record"] = kind;
    const std::string line = body.dump();
    if (file_.is_open()) file_ << line << '\n';
    if (format_ == Format::machine) std::cout << line << '\n';
  }

  bool human() const noexcept { return format_ == Format::human; }

 private:
  Format format_;
  std::ofstream file_;
};

std::uint64_t resolve_seed(const Options& o, const json* config_doc) {
  if (o.seed) return *o.seed;
  if (config_doc != nullptr && config_doc->contains("seed")) return config_doc->at("seed").get<std::uint64_t>();
  std::random_device rd;
  const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  std::cerr << "swarmhist: no seed given; using seed " << seed << '\n';
  return seed;
}

SimConfig load_config(const Options& o, json& doc) {
  if (o.config_path.empty()) throw InvalidParameter("--config is required", "config");
  doc = read_json_file(o.config_path);
  SimConfig config = config_from_json(doc);
  if (o.delta) config.delta = *o.delta;
  if (o.alpha) config.alpha = *o.alpha;
  if (o.epsilon) config.epsilon = *o.epsilon;
  config.seed = resolve_seed(o, &doc);
  validate(config);
  return config;
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string sci(double v, int digits) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(digits) << v;
  return s.str();
}

void print_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      std::cout << (c ? "  " : "") << std::left << std::setw(static_cast<int>(width[c])) << r[c];
    }
    std::cout << '\n';
  };
  line(header);
  std::vector<std::string> rule;
  for (auto w : width) rule.emplace_back(w, '-');
  line(rule);
  for (const auto& r : rows) line(r);
}

int cmd_simulate(const Options& o) {
  json doc;
  const SimConfig config = load_config(o, doc);
  if (o.output.empty()) throw InvalidParameter("--output is required", "output");

  const SimTrace trace = run_simulation(config);
  RunManifest manifest{"simulate", o.config_path, config.seed, config, {o.output}};
  const std::string text = trace_to_string(trace, manifest);
  {
    std::ofstream out(o.output, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidParameter("cannot write '" + o.output + "'", "output");
    out << text;
  }

  std::map<ExchangeOutcome, std::size_t> outcomes;
  for (const auto& r : trace.log) ++outcomes[r.outcome];
  std::size_t edges = 0;
  for (const auto& g : trace.graphs) edges += g.edges().size();

  if (o.format == Format::machine) {
    json counts = json::object();
    for (const auto& [k, v] : outcomes) counts[std::string(to_string(k))] = v;
    json body{{"record", "simulate_summary"}, {"manifest", manifest_to_json(manifest)},
              {"robots", config.n},            {"intervals", config.intervals},
              {"encounters", edges},           {"exchanges", trace.log.size()},
              {"links", trace.store.size()},   {"outcomes", counts}};
    std::cout << body.dump() << '\n';
    return 0;
  }
  std::cout << "trace written to " << o.output << " (seed " << config.seed << ")\n\n";
  print_table({"robots", "intervals", "encounters", "exchanges", "links"},
              {{std::to_string(config.n), std::to_string(config.intervals), std::to_string(edges),
                std::to_string(trace.log.size()), std::to_string(trace.store.size())}});
  std::cout << '\n';
  std::vector<std::vector<std::string>> rows;
  for (const auto& [k, v] : outcomes) rows.push_back({std::string(to_string(k)), std::to_string(v)});
  print_table({"outcome", "count"}, rows);
  if (!config.adversaries.empty()) {
    std::cout << '\n';
    std::vector<std::vector<std::string>> adv;
    for (const auto& a : config.adversaries) {
      std::string robots;
      for (auto r : a.robots) robots += (robots.empty() ? "" : ",") + std::to_string(r);
      std::string detail;
      if (a.behavior == Behavior::disappear) detail = "intervals " + std::to_string(a.from) + ".." + std::to_string(a.to);
      if (a.behavior == Behavior::forge_claim) detail = "target " + std::to_string(a.target);
      adv.push_back({std::string(to_string(a.behavior)), robots, detail});
    }
    print_table({"adversary", "robots", "detail"}, adv);
  }
  return 0;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidParameter("cannot read trace '" + path + "'", "trace");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void print_suspicion(const SuspicionReport& r) {
  std::cout << (r.observer == 0 ? std::string("central view") : "observer " + std::to_string(r.observer))
            << " as of interval " << r.as_of << (r.history_sufficient ? "" : " (history shorter than delta)") << '\n';
  std::vector<std::vector<std::string>> rows;
  for (const auto& s : r.disappeared) {
    rows.push_back({"disappeared", std::to_string(s.robot),
                    s.last_seen ? "last seen " + std::to_string(*s.last_seen) : std::string("never seen")});
  }
  for (const auto& c : r.collusion_suspects) {
    rows.push_back({"collusion", std::to_string(c.a) + "," + std::to_string(c.b),
                    "k=" + std::to_string(c.run) + " p^k=" + sci(c.probability, 3)});
  }
  for (const auto& [robot, v] : r.pairing_suspects) {
    rows.push_back({"pairing", std::to_string(robot),
                    "paired " + std::to_string(v.paired) + " of required " + std::to_string(v.required)});
  }
  for (const auto& u : r.unpaired_claims) {
    rows.push_back({"unpaired", std::to_string(u.claimer) + "->" + std::to_string(u.target),
                    "interval " + std::to_string(u.interval)});
  }
  if (rows.empty()) {
    std::cout << "  no suspicions\n";
  } else {
    print_table({"kind", "robots", "detail"}, rows);
  }
}

int cmd_analyze(const Options& o) {
  if (o.trace_path.empty()) throw InvalidParameter("a trace file is required", "trace");
  const LoadedTrace loaded = trace_from_string(read_file(o.trace_path));
  const SimTrace& trace = loaded.trace;
  const SimConfig& cfg = trace.config;

  DetectionParams params;
  params.delta = o.delta.value_or(cfg.delta);
  params.alpha = o.alpha.value_or(cfg.alpha);
  params.epsilon = o.epsilon.value_or(cfg.epsilon);
  params.n = cfg.n;
  params.p = cfg.p;
  SimConfig resolved = cfg;
  resolved.delta = params.delta;
  resolved.alpha = params.alpha;
  resolved.epsilon = params.epsilon;
  validate(resolved);
  const Interval window = std::max(cfg.chain_window(), params.delta);

  Emitter emit(o.format, o.output);
  RunManifest manifest{"analyze", o.trace_path, cfg.seed, resolved, {}};
  if (!o.output.empty()) manifest.outputs.push_back(o.output);
  emit.record("manifest", manifest_to_json(manifest));

  const Verifier verifier(trace.central_key, trace.store);
  std::vector<SuspicionReport> reports;
  {
    const LocalView central = build_central_view(trace.heads, trace.credentials, cfg.intervals, cfg.intervals, verifier);
    reports.push_back(analyze_view(central, params));
  }
  for (const auto& [robot, digest] : trace.heads) {
    const LinkPtr head = trace.store.get(digest);
    if (!head) continue;
    const LocalView view = build_local_view(*head, trace.credentials[robot - 1], cfg.n, window, verifier);
    reports.push_back(analyze_view(view, params));
  }
  const AuditReport audit = central_audit(trace);

  for (const auto& r : reports) emit.record("suspicion", to_json(r));
  emit.record("audit", to_json(audit));

  if (emit.human()) {
    std::cout << "central audit over " << audit.intervals << " intervals: " << audit.links_verified
              << " links verified, " << audit.findings() << " findings\n";
    std::vector<std::vector<std::string>> rows;
    for (const auto& f : audit.failures) {
      rows.push_back({"verification", std::to_string(f.robot), "interval " + std::to_string(f.interval),
                      std::string(to_string(f.reason))});
    }
    for (const auto& u : audit.unpaired) {
      rows.push_back({"unpaired", std::to_string(u.attributed_to),
                      "interval " + std::to_string(u.interval),
                      std::to_string(u.claimer) + " claims " + std::to_string(u.target) + " (" +
                          std::string(to_string(u.cause)) + ")"});
    }
    for (const auto& g : audit.gaps) {
      rows.push_back({"gap", std::to_string(g.robot), "intervals " + std::to_string(g.from) + ".." + std::to_string(g.to),
                      "no history"});
    }
    if (!rows.empty()) print_table({"finding", "robot", "when", "detail"}, rows);
    std::cout << '\n';
    for (const auto& r : reports) {
      print_suspicion(r);
      std::cout << '\n';
    }
  }
  return 0;
}

int cmd_prob(const Options& o) {
  json doc;
  ProbQuery q;
  if (!o.config_path.empty()) {
    const SimConfig config = config_from_json(read_json_file(o.config_path));
    q = {config.n, config.p, config.delta};
  }
  if (o.n) q.n = *o.n;
  if (o.p) q.p = *o.p;
  if (o.delta) q.delta = *o.delta;
  validate(q);

  const double none = prob_no_report(q);
  const double within = prob_report_within(q);
  const double all = prob_pair_meets_all(q.p, q.delta);
  Emitter emit(o.format, o.output);
  emit.record("prob", {{"n", q.n}, {"p", q.p}, {"delta", q.delta}, {"no_report", none}, {"report_within", within},
                       {"pair_meets_all", all}});
  if (emit.human()) {
    print_table({"n", "p", "delta", "no_report", "report_within", "pair_meets_all"},
                {{std::to_string(q.n), fixed(q.p, 4), std::to_string(q.delta), sci(none, 3), fixed(within, 6),
                  fixed(all, 6)}});
  }
  return 0;
}

int cmd_montecarlo(const Options& o) {
  json doc;
  const SimConfig config = load_config(o, doc);
  const MonteCarloSettings settings = montecarlo_from_json(doc);
  const std::size_t trials = o.trials.value_or(100000);
  if (trials < 1) throw InvalidParameter("trials must be at least 1", "trials");

  Emitter emit(o.format, o.output);
  RunManifest manifest{"montecarlo", o.config_path, config.seed, config, {}};
  if (!o.output.empty()) manifest.outputs.push_back(o.output);
  emit.record("manifest", manifest_to_json(manifest));

  bool all_pass = true;
  std::vector<std::vector<std::string>> rows;
  for (const auto& suite : settings.suites) {
    if (suite == "report_within") {
      const ProbQuery q{config.n, config.p, config.delta};
      const Estimate e = mc_report_within(q, trials, config.seed);
      const double closed = prob_report_within(q);
      const bool pass = std::abs(e.point - closed) <= settings.tolerance;
      all_pass = all_pass && pass;
      json body = to_json(e);
      body.update({{"suite", suite}, {"closed_form", closed}, {"tolerance", settings.tolerance}, {"pass", pass}});
      emit.record("estimate", body);
      rows.push_back({suite, fixed(e.point, 5) + " +/- " + fixed(e.std_error, 5), "closed form " + fixed(closed, 5),
                      pass ? "PASS" : "FAIL"});
    } else if (suite == "framing") {
      FramingParams fp;
      fp.n = config.n;
      fp.p = config.p;
      fp.delta = config.delta;
      fp.alpha = config.alpha;
      fp.intervals = config.delta;
      fp.runs = settings.runs;
      fp.seed = config.seed;
      const FramingResult r = run_framing_suite(fp);
      const bool pass = r.honest_framed == 0;
      all_pass = all_pass && pass;
      emit.record("framing", {{"suite", suite},
                              {"runs", r.runs},
                              {"adversaries_per_run", r.adversaries_per_run},
                              {"observations", r.observations},
                              {"observer_marks", r.observer_marks},
                              {"honest_framed", r.honest_framed},
                              {"runs_with_framing", r.runs_with_framing},
                              {"pass", pass}});
      rows.push_back({suite, "honest robots framed: " + std::to_string(r.honest_framed),
                      std::to_string(r.runs) + " runs, " + std::to_string(r.adversaries_per_run) + " adversaries",
                      pass ? "PASS" : "FAIL"});
    } else {
      CollusionParams cp;
      cp.n = config.n;
      cp.p = config.p;
      cp.delta = config.delta;
      cp.epsilon = config.epsilon;
      cp.runs = settings.runs;
      cp.seed = config.seed;
      const CollusionResult r = run_collusion_suite(cp);
      const bool pass = r.colluders_flagged == r.runs && r.rate_consistent();
      all_pass = all_pass && pass;
      emit.record("collusion", {{"suite", suite},
                                {"runs", r.runs},
                                {"colluders_flagged", r.colluders_flagged},
                                {"honest_pairs", r.honest_pairs},
                                {"honest_flagged", r.honest_flagged},
                                {"honest_rate", r.honest_rate},
                                {"expected_rate", r.expected_rate},
                                {"std_error", r.std_error},
                                {"pass", pass}});
      rows.push_back({suite,
                      "flagged " + std::to_string(r.colluders_flagged) + "/" + std::to_string(r.runs),
                      "honest rate " + fixed(r.honest_rate, 4) + " vs " + fixed(r.expected_rate, 4), pass ? "PASS" : "FAIL"});
    }
  }
  if (emit.human()) {
    std::cout << "seed " << config.seed << ", " << trials << " trials\n";
    print_table({"suite", "result", "reference", "check"}, rows);
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tamper-evident swarm history simulator and analyzer"};
  app.require_subcommand(1);
  Options o;
  std::string format = "human";

  auto common = [&](CLI::App* sub) {
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"human", "machine"}));
    sub->add_option("--output", o.output, "Output file");
  };
  auto detection = [&](CLI::App* sub) {
    sub->add_option("--delta", o.delta, "Detection horizon in intervals");
    sub->add_option("--alpha", o.alpha, "Tolerated adversary fraction");
    sub->add_option("--epsilon", o.epsilon, "Collusion flag threshold");
  };

  auto* sim = app.add_subcommand("simulate", "Run a scenario and write its trace");
  sim->add_option("--config", o.config_path, "Scenario config (JSON)")->required();
  sim->add_option("--seed", o.seed, "Root seed");
  common(sim);

  auto* analyze = app.add_subcommand("analyze", "Detection and central audit of a trace");
  analyze->add_option("trace", o.trace_path, "Trace file")->required();
  detection(analyze);
  common(analyze);

  auto* prob = app.add_subcommand("prob", "Closed-form detection probabilities");
  prob->add_option("--config", o.config_path, "Take n, p and delta from a config");
  prob->add_option("--n", o.n, "Swarm size");
  prob->add_option("--p", o.p, "Encounter probability");
  prob->add_option("--delta", o.delta, "Intervals");
  common(prob);

  auto* mc = app.add_subcommand("montecarlo", "Monte Carlo estimates and scenario suites");
  mc->add_option("--config", o.config_path, "Scenario config (JSON)")->required();
  mc->add_option("--seed", o.seed, "Root seed");
  mc->add_option("--trials", o.trials, "Trials for the report_within estimate");
  detection(mc);
  common(mc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  o.format = format == "machine" ? Format::machine : Format::human;

  try {
    if (*sim) return cmd_simulate(o);
    if (*analyze) return cmd_analyze(o);
    if (*prob) return cmd_prob(o);
    return cmd_montecarlo(o);
  } catch (const InvalidParameter& e) {
    std::cerr << "swarmhist: invalid " << e.field() << ": " << e.what() << '\n';
    return 2;
  } catch (const DecodeError& e) {
    std::cerr << "swarmhist: corrupt input: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "swarmhist: " << e.what() << '\n';
    return 1;
  }
}
