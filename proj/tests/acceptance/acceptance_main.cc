// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Usage: sitrep_acceptance [--cli PATH] [--only N]
#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "sitrep/attribution.h"
#include "sitrep/dag.h"
#include "sitrep/error.h"
#include "sitrep/evaluation.h"
#include "sitrep/http_server.h"
#include "sitrep/mlp.h"
#include "sitrep/recourse.h"
#include "sitrep/scm.h"
#include "sitrep/service.h"
#include "sitrep/severity.h"
#include "sitrep/split.h"
#include "sitrep/standardizer.h"
#include "sitrep/synthetic.h"
#include "support/fixtures.h"

namespace sitrep::acceptance {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fixed(double v, int digits) {
  std::ostringstream os;
  os.precision(digits);
  os << std::fixed << v;
  return os.str();
}

// Collects failed checks for one criterion.
class Checks {
 public:
  void Expect(bool ok, const std::string& what) {
    ++total_;
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  bool ok() const { return failed_ == 0; }
  int total() const { return total_; }
  std::string Summary() const {
    if (ok()) return std::to_string(total_) + " checks";
    std::string s = std::to_string(failed_) + "/" + std::to_string(total_) + " checks failed";
    for (const auto& f : failures_) s += "; " + f;
    return s;
  }

 private:
  int total_ = 0;
  int failed_ = 0;
  std::vector<std::string> failures_;
};

std::string Sci(double v) {
  std::ostringstream os;
  os.precision(2);
  os << std::scientific << v;
  return os.str();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Shared synthetic world: default generator (dag2 truth) with fitted models.
struct World {
  SyntheticData data;
  std::map<std::string, StructuralModel> scms;
  std::shared_ptr<const MlpModel> classifier;
  double fit_seconds = 0.0;
};

const World& SharedWorld() {
  static const World world = [] {
    const auto start = Clock::now();
    World w{GenerateSynthetic(SyntheticConfig{}), {}, nullptr, 0.0};
    const auto& table = w.data.table;
    for (const char* dag : {"dag2", "dag3"}) {
      w.scms.emplace(dag, FitScm(table, ExpandDag(BuiltinDag(dag), table.schema()),
                                 TrainConfig{}));
    }
    w.classifier = std::make_shared<MlpModel>(TrainClassifier(table, TrainConfig{}));
    w.fit_seconds = Seconds(start);
    return w;
  }();
  return world;
}

Outcome EmptyInterventionIdentity() {
  const World& w = SharedWorld();
  const auto& table = w.data.table;
  Checks checks;
  std::mt19937_64 rng(101);
  std::vector<std::size_t> rows;
  for (int i = 0; i < 100; ++i) rows.push_back(rng() % table.size());
  const auto start = Clock::now();
  double worst = 0.0;
  for (const auto& [name, scm] : w.scms) {
    for (std::size_t i : rows) {
      const auto r = scm.Counterfactual(table.features(i), InterventionSet{});
      for (std::size_t j = 0; j < r.values.size(); ++j) {
        const double err = std::abs(r.values[j] - table.features(i)[j]);
        worst = std::max(worst, err);
        checks.Expect(err <= 1e-9, name + " row " + std::to_string(i) + " node " +
                                       std::to_string(j) + " moved by " + std::to_string(err));
      }
      checks.Expect(r.prediction.label == scm.ObservationalPredict(table.features(i)).label,
                    name + " row " + std::to_string(i) + " changed class");
    }
  }
  const double seconds = Seconds(start);
  checks.Expect(seconds < 10.0, "took " + Fixed(seconds, 2) + " s");
  return {checks.ok(), "100 records x 2 DAGs, max drift " + Sci(worst) + ", " +
                           Fixed(seconds, 2) + " s (models fitted in " + Fixed(w.fit_seconds, 1) +
                           " s); " + checks.Summary()};
}

Outcome InterventionSemantics() {
  const World& w = SharedWorld();
  const auto& table = w.data.table;
  Checks checks;
  std::mt19937_64 rng(202);
  const auto start = Clock::now();
  int pairs = 0;
  int ancestor_checks = 0;
  for (const auto& [name, scm] : w.scms) {
    const FeatureDag& dag = scm.dag();
    for (int trial = 0; trial < 50; ++trial, ++pairs) {
      const std::size_t i = rng() % table.size();
      const std::size_t target = rng() % table.schema().size();
      const double value = table.features(i)[target] * 2.0 + 50.0;
      const std::vector<std::pair<std::size_t, double>> iv = {{target, value}};
      const std::string tag = name + " row " + std::to_string(i) + " node " + std::to_string(target);
      const auto r = scm.Counterfactual(table.features(i), iv);
      checks.Expect(r.values[target] == value, tag + " not pinned");
      const auto descendants = dag.Descendants(target);
      for (std::size_t j = 0; j < r.values.size(); ++j) {
        if (j == target || descendants[j]) continue;
        checks.Expect(std::abs(r.values[j] - r.factual[j]) <= 1e-9,
                      tag + " non-descendant " + std::to_string(j) + " moved");
      }
      const auto ancestors = dag.Ancestors(target);
      std::vector<std::size_t> candidates;
      for (std::size_t j = 0; j < ancestors.size(); ++j) {
        if (ancestors[j] && j != dag.severity_node()) candidates.push_back(j);
      }
      if (!candidates.empty()) {
        const std::size_t a = candidates[rng() % candidates.size()];
        std::vector<double> perturbed(table.features(i).begin(), table.features(i).end());
        perturbed[a] = perturbed[a] * 3.0 + 500.0;
        const auto moved = scm.Counterfactual(perturbed, iv);
        checks.Expect(moved.values[target] == value,
                      tag + " moved when ancestor " + std::to_string(a) + " changed");
        ++ancestor_checks;
      }
    }
  }
  const double seconds = Seconds(start);
  checks.Expect(ancestor_checks > 0, "no intervened node had an ancestor");
  checks.Expect(seconds < 10.0, "took " + Fixed(seconds, 2) + " s");
  return {checks.ok(), std::to_string(pairs) + " pairs, " + std::to_string(ancestor_checks) +
                           " ancestor perturbations, " + Fixed(seconds, 2) + " s; " +
                           checks.Summary()};
}

Outcome ClosedFormCounterfactuals() {
  Checks checks;
  int cases = 0;
  double worst = 0.0;
  for (const char* dag_name : {"dag2", "dag3"}) {
    SyntheticConfig config;
    config.counties = 400;
    config.noise_scale = 0.0;
    config.dag = dag_name;
    const SyntheticData data = GenerateSynthetic(config);
    const FeatureSchema& schema = data.table.schema();
    const FeatureDag dag = ExpandDag(BuiltinDag(dag_name), schema);
    TrainConfig train;
    train.epochs = 5;
    const StructuralModel scm = FitScm(data.table, dag, train);
    std::mt19937_64 rng(303);
    for (int c = 0; c < 10; ++c, ++cases) {
      const std::size_t i = rng() % data.table.size();
      std::map<std::size_t, double> forced;
      const int k = 1 + static_cast<int>(rng() % 3);
      for (int n = 0; n < k; ++n) {
        const std::size_t node = rng() % schema.size();
        forced[node] = data.table.features(i)[node] * (0.25 + static_cast<double>(rng() % 100) / 40);
      }
      const std::vector<std::pair<std::size_t, double>> iv(forced.begin(), forced.end());
      const auto r = scm.Counterfactual(data.table.features(i), iv);
      const auto expected =
          testing::HandPropagate(data.truth, schema, dag, data.table.features(i), forced);
      for (std::size_t j = 0; j < expected.size(); ++j) {
        const double err = std::abs(r.values[j] - expected[j]);
        worst = std::max(worst, err);
        checks.Expect(err <= 1e-6, std::string(dag_name) + " case " + std::to_string(c) +
                                       " node " + std::to_string(j) + " off by " +
                                       std::to_string(err));
      }
    }
  }
  checks.Expect(cases >= 10, "fewer than 10 cases");
  return {checks.ok(), std::to_string(cases) + " cases, max error " + Sci(worst) +
                           "; " + checks.Summary()};
}

std::vector<double> Range(int lo, int hi) {
  std::vector<double> v;
  for (int i = lo; i <= hi; ++i) v.push_back(i);
  return v;
}

// Exact flip fraction of the desk model computed by enumeration in this file.
double DeskFlipFraction(const std::vector<double>& record, const std::vector<std::size_t>& unit,
                        const std::vector<double>& support, double threshold) {
  const bool high = record[0] + record[1] > threshold;
  int flips = 0;
  int total = 0;
  std::vector<double> x = record;
  if (unit.size() == 1) {
    for (double v : support) {
      x = record;
      x[unit[0]] = v;
      flips += (x[0] + x[1] > threshold) != high;
      ++total;
    }
  } else {
    for (double a : support) {
      for (double b : support) {
        x = record;
        x[unit[0]] = a;
        x[unit[1]] = b;
        flips += (x[0] + x[1] > threshold) != high;
        ++total;
      }
    }
  }
  return static_cast<double>(flips) / total;
}

Outcome AttributionAgainstOracle() {
  Checks checks;
  const double threshold = 10.0;
  const auto model = testing::DeskModel(threshold);
  const auto support = Range(0, 12);
  const PerturbationSampler sampler(std::vector<std::vector<double>>(2, support));
  std::mt19937_64 rng(404);
  double worst = 0.0;
  int comparisons = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const std::vector<double> record = {static_cast<double>(rng() % 13),
                                        static_cast<double>(rng() % 13)};
    for (const std::vector<std::size_t>& unit :
         std::vector<std::vector<std::size_t>>{{0}, {1}, {0, 1}}) {
      const double hand = DeskFlipFraction(record, unit, support, threshold);
      const std::vector<std::vector<double>> grid(unit.size(), support);
      const double oracle = ExhaustiveNecessityOracle(model, record, unit, grid);
      const double mc = NecessityScore(model, record, unit, sampler, 10'000, 4242);
      checks.Expect(oracle == hand, "library oracle disagrees with enumeration");
      worst = std::max(worst, std::abs(mc - oracle));
      checks.Expect(std::abs(mc - oracle) <= 0.02,
                    "MC " + std::to_string(mc) + " vs oracle " + std::to_string(oracle));
      ++comparisons;
    }
  }

  // x3 never reaches the prediction, so its score must be exactly zero.
  const FunctionModel ignores_x3(3, [threshold](std::span<const double> x) {
    return CertainPrediction(x[0] + x[1] > threshold ? SeverityClass::kHigh
                                                     : SeverityClass::kLow);
  });
  const FeatureSpace space(testing::DeskSchema(3),
                           PerturbationSampler(std::vector<std::vector<double>>(3, support)),
                           {1.0, 1.0, 1.0});
  AttributionOptions options;
  options.samples = 10'000;
  options.seed = 4242;
  double ignored_max = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const std::vector<double> record = {static_cast<double>(rng() % 13),
                                        static_cast<double>(rng() % 13),
                                        static_cast<double>(rng() % 13)};
    const auto report = ComputeNecessityReport(ignores_x3, space, record,
                                               AttributionLevel::kFeature, options);
    ignored_max = std::max(ignored_max, report.scores[2].alpha);
    checks.Expect(report.scores[2].alpha == 0.0,
                  "ignored feature scored " + std::to_string(report.scores[2].alpha));
  }
  return {checks.ok(), std::to_string(comparisons) + " MC/oracle pairs, max gap " +
                           Fixed(worst, 4) + ", ignored feature alpha " +
                           Fixed(ignored_max, 1) + "; " + checks.Summary()};
}

Outcome RecourseContract() {
  const World& w = SharedWorld();
  const auto& table = w.data.table;
  const FeatureSpace space = FeatureSpace::FromTable(table);
  const ClassifierModel model(w.classifier);
  Checks checks;
  std::mt19937_64 rng(505);
  const auto start = Clock::now();
  int suggestions = 0;
  int flipped = 0;
  int no_recourse = 0;
  for (int trial = 0; trial < 50; ++trial) {
    RecourseRequest request;
    const auto row = table.features(rng() % table.size());
    request.features.assign(row.begin(), row.end());
    const int current = static_cast<int>(model.Predict(request.features).label);
    request.desired = static_cast<SeverityClass>((current + 1 + rng() % 2) % 3);
    request.max_features = 1 + static_cast<int>(rng() % 5);
    request.num_suggestions = 3;
    request.seed = rng();
    if (trial % 5 == 0) request.immutable = {table.schema().feature(rng() % 93).name};
    const auto result = GenerateRecourse(model, space, request);
    const auto again = GenerateRecourse(model, space, request);
    const std::string tag = "request " + std::to_string(trial);
    checks.Expect(result.ToJson() == again.ToJson(), tag + " not deterministic");
    if (result.status == RecourseStatus::kNoRecourseFound) ++no_recourse;
    for (const auto& s : result.suggestions) {
      ++suggestions;
      std::vector<double> x = request.features;
      bool nonnegative = true;
      for (const auto& c : s.changes) {
        x[c.feature] = c.to;
        nonnegative = nonnegative && c.to >= 0.0;
        checks.Expect(!request.immutable.count(c.name), tag + " changed immutable " + c.name);
      }
      const bool flips = model.Predict(x).label == request.desired;
      flipped += flips;
      checks.Expect(flips, tag + " suggestion does not reach the desired class");
      checks.Expect(s.changes.size() <= static_cast<std::size_t>(request.max_features),
                    tag + " exceeds k");
      checks.Expect(nonnegative, tag + " produced a negative value");
      checks.Expect(ValidateRecourse(model, table.schema(), request, s).ok(),
                    tag + " fails validation");
    }
  }
  checks.Expect(suggestions > 0, "no suggestions at all");

  // Desk model: High iff x1 + x2 > 10, so the minimal L1 move from (a, b)
  // with a + b <= 10 is 10 - a - b (an infimum, approached from above).
  const auto desk = testing::DeskModel(10.0);
  const FeatureSpace desk_space(testing::DeskSchema(2),
                                PerturbationSampler({Range(0, 20), Range(0, 20)}), {1.0, 1.0});
  double worst_ratio = 0.0;
  for (const auto& [a, b] : std::vector<std::pair<double, double>>{{3, 3}, {1, 2}, {5, 0}, {0, 0}}) {
    for (int k : {1, 2}) {
      RecourseRequest request;
      request.features = {a, b};
      request.desired = SeverityClass::kHigh;
      request.max_features = k;
      request.seed = 7;
      const auto result = GenerateRecourse(desk, desk_space, request);
      const double minimal = 10.0 - a - b;
      if (result.suggestions.empty()) {
        checks.Expect(false, "desk model found no recourse");
        continue;
      }
      const double ratio = result.suggestions.front().distance / minimal;
      worst_ratio = std::max(worst_ratio, ratio);
      checks.Expect(ratio >= 1.0 && ratio <= 1.1,
                    "desk best distance ratio " + std::to_string(ratio));
    }
  }
  const double seconds = Seconds(start);
  checks.Expect(seconds < 30.0, "took " + Fixed(seconds, 2) + " s");
  return {checks.ok(), "50 requests, " + std::to_string(flipped) + "/" +
                           std::to_string(suggestions) + " suggestions flip (" +
                           std::to_string(no_recourse) + " no_recourse_found), desk ratio " +
                           Fixed(worst_ratio, 4) + ", " + Fixed(seconds, 2) + " s; " +
                           checks.Summary()};
}

Outcome ClassifierTraining() {
  Checks checks;
  const auto start = Clock::now();
  const SyntheticData data = GenerateSynthetic(SyntheticConfig::Separable());
  const auto& table = data.table;

  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < table.size(); ++i) {
    rows.emplace_back(table.features(i).begin(), table.features(i).end());
  }
  const Standardizer standardizer = Standardizer::Fit(rows);
  Batch batch;
  for (std::size_t i = 0; i < 32; ++i) {
    std::vector<double> z(rows[i].size());
    standardizer.Transform(rows[i], z);
    batch.inputs.push_back(std::move(z));
    batch.labels.push_back(*table.label(i));
  }
  const TrainConfig config;
  double worst_grad = 0.0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const MlpModel model = MlpModel::Initialize(static_cast<int>(table.schema().size()),
                                                config.hidden_layers, standardizer, seed);
    GradientCheckOptions options;
    options.seed = seed;
    options.max_parameters = 512;
    worst_grad = std::max(worst_grad, GradientCheck(model, batch, options));
  }
  checks.Expect(worst_grad < 1e-4, "gradient check " + std::to_string(worst_grad));

  const auto plan = StratifiedKFold(table, 5, 7);
  const EvalReport report = EvaluateMacroF1(table, plan, config);
  checks.Expect(report.mean_macro_f1 >= 0.90,
                "mean macro-F1 " + Fixed(report.mean_macro_f1, 4));
  const double seconds = Seconds(start);
  checks.Expect(seconds < 120.0, "took " + Fixed(seconds, 1) + " s");
  return {checks.ok(), "gradient max rel error " + Sci(worst_grad) +
                           ", 5-fold macro-F1 " + Fixed(report.mean_macro_f1, 4) + " on " +
                           std::to_string(table.size()) + " records, " + Fixed(seconds, 1) +
                           " s; " + checks.Summary()};
}

Outcome BucketingAndSchema() {
  Checks checks;
  checks.Expect(BucketSeverity(9'999.99) == SeverityClass::kLow, "9,999.99 is not Low");
  checks.Expect(BucketSeverity(10'000.0) == SeverityClass::kMedium, "10,000 is not Medium");
  checks.Expect(BucketSeverity(100'000.0) == SeverityClass::kHigh, "100,000 is not High");
  const auto& schema = DefaultSchema();
  checks.Expect(schema.size() == 93, "schema has " + std::to_string(schema.size()) + " features");
  checks.Expect(schema.SourceMembers(Source::kSatellite).size() == 81, "satellite count");
  checks.Expect(schema.SourceMembers(Source::kNews).size() == 6, "news count");
  checks.Expect(schema.SourceMembers(Source::kReddit).size() == 6, "reddit count");
  checks.Expect(kAllSources.size() == 3, "source count");
  return {checks.ok(), "93 = " + std::to_string(schema.SourceMembers(Source::kSatellite).size()) +
                           "+" + std::to_string(schema.SourceMembers(Source::kNews).size()) +
                           "+" + std::to_string(schema.SourceMembers(Source::kReddit).size()) +
                           "; " + checks.Summary()};
}

struct CliRun {
  int exit_code = -1;
  std::string out;
};

CliRun RunCli(const std::string& cli, const std::string& args) {
  const std::string command = cli + " " + args + " 2>/dev/null";
  CliRun run;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) return run;
  std::array<char, 4096> buffer;
  std::size_t n;
  while ((n = std::fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
    run.out.append(buffer.data(), n);
  }
  const int status = pclose(pipe);
  run.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return run;
}

std::optional<json> ParseOrNull(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

Outcome CliHttpParity(const std::optional<std::string>& cli) {
  if (!cli) return {false, "no CLI binary given (pass --cli PATH)"};
  Checks checks;
  std::ifstream fixture_file(SITREP_PARITY_FIXTURE);
  if (!fixture_file) return {false, "cannot read " + std::string(SITREP_PARITY_FIXTURE)};
  const json fixture = json::parse(fixture_file);
  const auto& synth = fixture["synthetic"];

  testing::TempDir dir;
  const std::string data = dir.File("data.csv");
  const std::string geometry = dir.File("geometry.json");
  const std::string models = dir.path().string();
  const auto made = RunCli(*cli, "synth --out " + data + " --geometry " + geometry +
                                     " --counties " + std::to_string(synth["counties"].get<int>()) +
                                     " --events " + std::to_string(synth["events"].get<int>()) +
                                     " --seed " + std::to_string(synth["seed"].get<int>()) +
                                     " --dag " + synth["dag"].get<std::string>());
  if (made.exit_code != 0) return {false, "sitrep synth failed"};
  const auto trained = RunCli(*cli, "train --data " + data + " --out " + models);
  if (trained.exit_code != 0) return {false, "sitrep train failed"};

  ServiceOptions options;
  options.data_path = data;
  options.models_dir = models;
  options.geometry_path = geometry;
  auto service = std::make_shared<Service>(LoadAppState(options));
  if (!service->snapshot()->warnings.empty()) {
    return {false, "service trained a model instead of loading it: " +
                       service->snapshot()->warnings.front()};
  }
  HttpServer server(service);
  const int port = server.BindToAnyPort("127.0.0.1");
  std::thread serving([&] { server.Serve(); });
  server.WaitUntilReady();
  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(120, 0);

  const std::string state = "--json {cmd} --data " + data + " --models " + models +
                            " --geometry " + geometry;
  auto cli_json = [&](const std::string& cmd, const std::string& args) -> std::optional<json> {
    std::string prefix = state;
    prefix.replace(prefix.find("{cmd}"), 5, cmd);
    const auto run = RunCli(*cli, prefix + " " + args);
    if (run.exit_code != 0) return std::nullopt;
    return ParseOrNull(run.out);
  };
  auto http_json = [&](const httplib::Result& res) -> std::optional<json> {
    if (!res || res->status != 200) return std::nullopt;
    return ParseOrNull(res->body);
  };

  int cases = 0;
  for (const auto& c : fixture["cases"]) {
    ++cases;
    const std::string fips = c["fips"];
    const std::string event = c["event"];
    const std::string dag = c["dag"];
    const std::string record = " --fips " + fips + " --event " + event + " --dag " + dag;
    const std::string tag = "case " + std::to_string(cases);

    std::string sets;
    for (const auto& [name, value] : c["interventions"].items()) {
      std::ostringstream os;
      os.precision(17);
      os << value.get<double>();
      sets += " --set " + name + "=" + os.str();
    }
    const json sim_body = {{"fips", fips}, {"event", event}, {"dag", dag},
                           {"interventions", c["interventions"]}};
    const auto sim_cli = cli_json("simulate", record + sets);
    const auto sim_http =
        http_json(client.Post("/api/simulate", sim_body.dump(), "application/json"));
    checks.Expect(sim_cli && sim_http && *sim_cli == *sim_http, tag + " simulate differs");

    const std::string level = c["level"];
    const std::string seed = std::to_string(c["seed"].get<int>());
    const auto attr_cli = cli_json("attribute", record + " --level " + level + " --seed " + seed);
    const auto attr_http =
        http_json(client.Get("/api/attribution/" + fips + "?event=" + event + "&dag=" + dag +
                             "&level=" + level + "&seed=" + seed));
    checks.Expect(attr_cli && attr_http && *attr_cli == *attr_http, tag + " attribute differs");

    const std::string desired = c["desired"];
    const json rec_body = {{"fips", fips},       {"event", event},
                           {"dag", dag},         {"desired", desired},
                           {"seed", c["seed"]}};
    const auto rec_cli = cli_json("recourse", record + " --desired " + desired + " --seed " + seed);
    const auto rec_http =
        http_json(client.Post("/api/recourse", rec_body.dump(), "application/json"));
    checks.Expect(rec_cli && rec_http && *rec_cli == *rec_http, tag + " recourse differs");
  }
  server.Stop();
  serving.join();
  checks.Expect(cases == 10, "fixture has " + std::to_string(cases) + " cases");
  return {checks.ok(), std::to_string(cases) + " cases x simulate/attribute/recourse; " +
                           checks.Summary()};
}

}  // namespace
}  // namespace sitrep::acceptance

int main(int argc, char** argv) {
  using namespace sitrep::acceptance;
  std::optional<std::string> cli;
  std::optional<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) {
      cli = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      only = std::stoi(argv[++i]);
    } else {
      std::cerr << "usage: " << argv[0] << " [--cli PATH] [--only N]\n";
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"empty intervention reproduces the factual record", EmptyInterventionIdentity},
      {"single interventions pin the node and spare non-descendants", InterventionSemantics},
      {"zero-noise counterfactuals match hand propagation", ClosedFormCounterfactuals},
      {"Monte Carlo necessity matches the exhaustive oracle", AttributionAgainstOracle},
      {"recourse suggestions honour the contract", RecourseContract},
      {"classifier gradients and cross-validated macro-F1", ClassifierTraining},
      {"severity bucketing and default schema", BucketingAndSchema},
      {"CLI and HTTP answers agree", [&] { return CliHttpParity(cli); }},
  };

  int failures = 0;
  for (std::size_t n = 0; n < criteria.size(); ++n) {
    const int id = static_cast<int>(n) + 1;
    if (only && *only != id) continue;
    const auto& [name, run] = criteria[n];
    Outcome outcome;
    const auto start = Clock::now();
    try {
      outcome = run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("threw: ") + e.what()};
    }
    if (!outcome.pass) ++failures;
    std::cout << (outcome.pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << name
              << " [" << outcome.detail << "] (" << Fixed(Seconds(start), 2) << " s wall)"
              << std::endl;
  }
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
