/*
 * Copyright 2026 The Antidote Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "antidote/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "antidote/binary_io.hpp"
#include "antidote/keyvalue.hpp"

namespace antidote {

namespace fs = std::filesystem;

std::string RegimeSpec::name() const { return std::string(classifier_name(kind)) + ":" + regime_name(regime); }

RegimeSpec RegimeSpec::parse(std::string_view text) {
  const auto t = trim(text);
  const auto colon = t.find(':');
  if (colon == std::string::npos) throw ConfigError("regime '" + t + "' must look like <lr|nn>:<regime>");
  RegimeSpec s;
  s.kind = parse_classifier(trim(t.substr(0, colon)));
  s.regime = parse_regime(trim(t.substr(colon + 1)));
  return s;
}

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "schema", "train", "test", "data_dir", "output_dir", "bundle", "seed", "threads", "repetitions",
      "comparability.max_discrete_diff", "comparability.max_continuous_gap", "gmm.max_modes",
      "gmm.weight_concentration", "gmm.prune_weight", "gmm.std_floor", "gmm.max_iterations", "gan.epochs",
      "gan.batch_size", "gan.lr_generator", "gan.lr_discriminator", "gan.weight_decay_generator",
      "gan.weight_decay_discriminator", "gan.beta1", "gan.beta2", "gan.temperature", "gan.noise_dim",
      "gan.gradient_penalty", "gan.discriminator_steps", "gan.trace_rows", "sample.target_percentage",
      "sample.max_iterations", "sample.require_requested_sensitive", "lr.l2", "lr.max_iterations",
      "lr.tolerance", "nn.hidden", "nn.iterations", "nn.batch_size", "nn.learning_rate", "nn.weight_decay",
      "nn.halve_every", "antidro.max_candidates", "antidro.target_percentage", "regimes", "random.percentage",
      "tradeoff.percentages", "tradeoff.regimes"};
  return keys;
}

int to_int(long long v, const char* what) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError(std::string(what) + " is out of range");
  }
  return static_cast<int>(v);
}

template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || n <= 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t k; (k = next.fetch_add(1)) < n;) {
        try {
          fn(k);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::size_t rows_for(double percentage, std::size_t train_rows) {
  return static_cast<std::size_t>(std::ceil(percentage / 100.0 * static_cast<double>(train_rows) - 1e-9));
}

bool needs_antidote(Regime r) {
  return r == Regime::kAnti || r == Regime::kAntiDis || r == Regime::kAntiDro || r == Regime::kAntiOnly;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::string_view text, const fs::path& base_dir, std::string origin) {
  const auto kv = KeyValueFile::parse(text, std::move(origin));
  for (const auto& e : kv.entries()) {
    if (!known_keys().count(e.key)) {
      throw ConfigError(kv.origin() + ":" + std::to_string(e.line) + ": unknown key '" + e.key + "'");
    }
  }
  ExperimentConfig c;
  auto against = [](const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
  };
  fs::path data_dir = base_dir;
  if (auto d = kv.find("data_dir")) {
    data_dir = against(base_dir, *d);
  } else if (const char* env = std::getenv(kDataDirEnv); env && *env) {
    data_dir = env;
  }
  c.schema_path = against(base_dir, kv.get("schema"));
  c.train_path = against(data_dir, kv.get("train"));
  if (auto t = kv.find("test")) c.test_path = against(data_dir, *t);
  c.output_dir = against(base_dir, kv.get_or("output_dir", "out"));
  if (auto b = kv.find("bundle")) c.bundle_path = against(base_dir, *b);

  const long long seed = kv.get_int("seed", 0);
  if (seed < 0) throw ConfigError("seed must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.threads = to_int(kv.get_int("threads", 1), "threads");
  c.repetitions = to_int(kv.get_int("repetitions", 5), "repetitions");

  c.comparability.max_discrete_diff = to_int(kv.get_int("comparability.max_discrete_diff", 1), "T_d");
  c.comparability.max_continuous_gap = kv.get_double("comparability.max_continuous_gap", 0.025);

  c.gmm.max_modes = to_int(kv.get_int("gmm.max_modes", c.gmm.max_modes), "gmm.max_modes");
  c.gmm.weight_concentration = kv.get_double("gmm.weight_concentration", c.gmm.weight_concentration);
  c.gmm.prune_weight = kv.get_double("gmm.prune_weight", c.gmm.prune_weight);
  c.gmm.std_floor = kv.get_double("gmm.std_floor", c.gmm.std_floor);
  c.gmm.max_iterations = to_int(kv.get_int("gmm.max_iterations", c.gmm.max_iterations), "gmm.max_iterations");

  auto& g = c.gan;
  g.epochs = to_int(kv.get_int("gan.epochs", g.epochs), "gan.epochs");
  g.batch_size = to_int(kv.get_int("gan.batch_size", g.batch_size), "gan.batch_size");
  g.lr_generator = kv.get_double("gan.lr_generator", g.lr_generator);
  g.lr_discriminator = kv.get_double("gan.lr_discriminator", g.lr_discriminator);
  g.weight_decay_generator = kv.get_double("gan.weight_decay_generator", g.weight_decay_generator);
  g.weight_decay_discriminator = kv.get_double("gan.weight_decay_discriminator", g.weight_decay_discriminator);
  g.adam_beta1 = kv.get_double("gan.beta1", g.adam_beta1);
  g.adam_beta2 = kv.get_double("gan.beta2", g.adam_beta2);
  g.temperature = kv.get_double("gan.temperature", g.temperature);
  g.noise_dim = to_int(kv.get_int("gan.noise_dim", g.noise_dim), "gan.noise_dim");
  g.gradient_penalty = kv.get_double("gan.gradient_penalty", g.gradient_penalty);
  g.discriminator_steps = to_int(kv.get_int("gan.discriminator_steps", g.discriminator_steps), "gan.discriminator_steps");
  g.trace_rows = to_int(kv.get_int("gan.trace_rows", g.trace_rows), "gan.trace_rows");

  c.sampling.target_percentage = kv.get_double("sample.target_percentage", c.sampling.target_percentage);
  c.sampling.max_iterations = to_int(kv.get_int("sample.max_iterations", c.sampling.max_iterations), "sample.max_iterations");
  c.sampling.require_requested_sensitive =
      kv.get_bool("sample.require_requested_sensitive", c.sampling.require_requested_sensitive);

  auto& rc = c.classifier;
  rc.logreg.l2 = kv.get_double("lr.l2", rc.logreg.l2);
  rc.logreg.max_iterations = to_int(kv.get_int("lr.max_iterations", rc.logreg.max_iterations), "lr.max_iterations");
  rc.logreg.tolerance = kv.get_double("lr.tolerance", rc.logreg.tolerance);
  if (kv.has("nn.hidden")) {
    rc.nn.hidden.clear();
    for (const auto& h : kv.get_list("nn.hidden")) rc.nn.hidden.push_back(to_int(parse_int(h, "nn.hidden"), "nn.hidden"));
  }
  rc.nn.iterations = to_int(kv.get_int("nn.iterations", rc.nn.iterations), "nn.iterations");
  rc.nn.batch_size = to_int(kv.get_int("nn.batch_size", rc.nn.batch_size), "nn.batch_size");
  rc.nn.learning_rate = kv.get_double("nn.learning_rate", rc.nn.learning_rate);
  rc.nn.weight_decay = kv.get_double("nn.weight_decay", rc.nn.weight_decay);
  rc.nn.halve_every = kv.get_int("nn.halve_every", rc.nn.halve_every);
  rc.max_candidates = to_int(kv.get_int("antidro.max_candidates", 0), "antidro.max_candidates");
  c.antidro_percentage = kv.get_double("antidro.target_percentage", c.sampling.target_percentage);

  const auto regimes = kv.has("regimes") ? kv.get_list("regimes") : std::vector<std::string>{"lr:base", "nn:base"};
  for (const auto& r : regimes) c.regimes.push_back(RegimeSpec::parse(r));
  c.random_percentage = kv.get_double("random.percentage", c.random_percentage);
  if (kv.has("tradeoff.percentages")) {
    c.tradeoff_percentages.clear();
    for (const auto& p : kv.get_list("tradeoff.percentages")) c.tradeoff_percentages.push_back(parse_double(p, "tradeoff.percentages"));
  }
  const auto tr = kv.has("tradeoff.regimes") ? kv.get_list("tradeoff.regimes")
                                             : std::vector<std::string>{"nn:anti", "nn:antidro"};
  for (const auto& r : tr) c.tradeoff_regimes.push_back(RegimeSpec::parse(r));
  return c;
}

ExperimentConfig ExperimentConfig::read(const fs::path& path) {
  std::string text;
  try {
    text = read_file_bytes(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  return parse(text, path.parent_path().empty() ? fs::path(".") : path.parent_path(), path.string());
}

void ExperimentConfig::validate() const {
  if (!fs::exists(schema_path)) throw ConfigError("schema file not found: " + schema_path.string());
  if (!fs::exists(train_path)) throw ConfigError("training data not found: " + train_path.string() + " (set data_dir or " + kDataDirEnv + ")");
  if (!test_path.empty() && !fs::exists(test_path)) throw ConfigError("test data not found: " + test_path.string());
  if (comparability.max_discrete_diff < 0) throw ConfigError("T_d must be non-negative");
  if (!(comparability.max_continuous_gap >= 0 && comparability.max_continuous_gap <= 1)) {
    throw ConfigError("T_c must lie in [0, 1]");
  }
  if (gmm.max_modes < 1) throw ConfigError("gmm.max_modes must be positive");
  if (!(gmm.std_floor > 0)) throw ConfigError("gmm.std_floor must be positive");
  gan.validate();
  if (!(sampling.target_percentage >= 0)) throw ConfigError("sample.target_percentage must be non-negative");
  if (!(antidro_percentage >= 0)) throw ConfigError("antidro.target_percentage must be non-negative");
  if (sampling.max_iterations < 0) throw ConfigError("sample.max_iterations must be non-negative");
  RegimeConfig probe = classifier;
  probe.kind = ClassifierKind::kNeuralNet;
  probe.validate();
  for (const auto& r : regimes) {
    if (r.regime == Regime::kAntiDro && r.kind != ClassifierKind::kNeuralNet) {
      throw ConfigError("antidro requires the nn classifier");
    }
  }
  for (const auto& r : tradeoff_regimes) {
    if (r.regime == Regime::kAntiDro && r.kind != ClassifierKind::kNeuralNet) {
      throw ConfigError("antidro requires the nn classifier");
    }
  }
  if (repetitions < 1) throw ConfigError("repetitions must be at least 1");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (!(random_percentage >= 0)) throw ConfigError("random.percentage must be non-negative");
  for (double p : tradeoff_percentages) {
    if (!(p >= 0)) throw ConfigError("tradeoff percentages must be non-negative");
  }
}

fs::path ExperimentConfig::resolved_bundle() const {
  return bundle_path.empty() ? output_dir / "generator.bundle" : bundle_path;
}

PreparedData prepare_data(const ExperimentConfig& cfg) {
  cfg.validate();
  PreparedData d;
  d.schema = FeatureSchema::read(cfg.schema_path);
  cfg.comparability.validate(d.schema.num_discrete());
  const RawTable train = load_dataset(cfg.train_path, d.schema);
  d.scaling = fit_scaling(train, d.schema);
  d.train = encode(train, d.schema, d.scaling, Split::kTrain);
  if (!cfg.test_path.empty()) {
    d.test = encode(load_dataset(cfg.test_path, d.schema), d.schema, d.scaling, Split::kTest);
  }
  return d;
}

PairSummary cmd_pairs(const ExperimentConfig& cfg) {
  const PreparedData d = prepare_data(cfg);
  fs::create_directories(cfg.output_dir);
  PairSummary s;
  const auto train_pairs = mine_pairs(d.train, cfg.comparability);
  write_file_atomic(cfg.output_dir / "pairs_train.csv", pairs_to_csv(train_pairs));
  s.train = count_pairs(train_pairs);
  s.train_rows = d.train.rows();
  std::string table = "split,rows,positive,negative,positive_differing,negative_differing\n";
  table += fmt::format("train,{},{},{},{},{}\n", s.train_rows, s.train.positive, s.train.negative,
                       s.train.positive_differing, s.train.negative_differing);
  if (d.test) {
    const auto test_pairs = mine_pairs(*d.test, cfg.comparability);
    write_file_atomic(cfg.output_dir / "pairs_test.csv", pairs_to_csv(test_pairs));
    s.test = count_pairs(test_pairs);
    s.test_rows = d.test->rows();
    table += fmt::format("test,{},{},{},{},{}\n", s.test_rows, s.test->positive, s.test->negative,
                         s.test->positive_differing, s.test->negative_differing);
  }
  write_file_atomic(cfg.output_dir / "pair_counts.csv", table);
  return s;
}

namespace {

ArtifactBundle train_bundle(const ExperimentConfig& cfg, const PreparedData& d) {
  const auto pairs = sensitive_differing(mine_pairs(d.train, cfg.comparability));
  log_info(fmt::format("training generator on {} comparable pairs", pairs.size()));
  ArtifactBundle b;
  b.schema = d.schema;
  b.scaling = d.scaling;
  b.comparability = cfg.comparability;
  b.root_seed = cfg.seed;
  const auto rep = ReRepresentation::fit(d.train, cfg.gmm, derive_seed(cfg.seed, "gmm"));
  GanHyperparams hp = cfg.gan;
  hp.seed = derive_seed(cfg.seed, "gan");
  b.model = train_generator(d.train, pairs, rep, hp, cfg.comparability, [](const TraceRow& r) {
    log_info(fmt::format("epoch {:4d}  sensitive {:.4f}  discrete {:.4f}  continuous {:.4f}  all {:.4f}", r.epoch,
                         r.sensitive, r.discrete, r.continuous, r.all));
  });
  b.metadata["train_rows"] = std::to_string(d.train.rows());
  b.metadata["train_pairs"] = std::to_string(pairs.size());
  return b;
}

// Bundle whose schema matches the experiment, loaded or freshly trained.
ArtifactBundle obtain_bundle(const ExperimentConfig& cfg, const PreparedData& d) {
  const auto path = cfg.resolved_bundle();
  if (fs::exists(path)) {
    auto b = ArtifactBundle::load(path);
    if (!(b.schema == d.schema) || b.scaling.min != d.scaling.min || b.scaling.max != d.scaling.max) {
      throw ConfigError("bundle " + path.string() + " was trained on a different schema or training split");
    }
    log_info("using generator bundle " + path.string());
    return b;
  }
  auto b = train_bundle(cfg, d);
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  b.save(path);
  write_file_atomic(cfg.output_dir / "trace.csv", trace_to_csv(b.model.trace));
  return b;
}

}  // namespace

ArtifactBundle cmd_train_generator(const ExperimentConfig& cfg) {
  const PreparedData d = prepare_data(cfg);
  fs::create_directories(cfg.output_dir);
  auto b = train_bundle(cfg, d);
  const auto path = cfg.resolved_bundle();
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  b.save(path);
  write_file_atomic(cfg.output_dir / "trace.csv", trace_to_csv(b.model.trace));
  return b;
}

SampleResult cmd_sample(const ExperimentConfig& cfg, const fs::path& bundle_path) {
  cfg.validate();
  auto b = ArtifactBundle::load(bundle_path);
  const EncodedDataset train = encode(load_dataset(cfg.train_path, b.schema), b.schema, b.scaling, Split::kTrain);
  SampleOptions opt = cfg.sampling;
  opt.seed = derive_seed(cfg.seed, "sample");
  auto result = sample_antidotes(b.model, train, cfg.comparability, opt);
  fs::create_directories(cfg.output_dir);
  write_file_atomic(cfg.output_dir / "antidote.csv", antidote_to_csv(result.set, b.schema));
  return result;
}

RegimeOutcome run_regime(const RegimeSpec& spec, const RegimeConfig& base_cfg, const PreparedData& data,
                         const std::vector<ComparablePair>& test_pairs, const AntidoteSet* antidote,
                         const ComparabilityConfig& comparability, double random_percentage, int repetitions,
                         std::uint64_t seed, int threads) {
  RegimeOutcome out;
  out.spec = spec;
  try {
    if (!data.test) throw ConfigError("experiments need a test split");
    RegimeConfig rc = base_cfg;
    rc.kind = spec.kind;
    rc.regime = spec.regime;
    rc.validate();
    if (needs_antidote(spec.regime) && !antidote) throw ConfigError("regime " + spec.name() + " needs antidote data");
    // Logistic regression is deterministic; only randomised regimes repeat.
    const int reps = (spec.kind == ClassifierKind::kLogReg && spec.regime != Regime::kRandomComparable) ? 1 : repetitions;
    out.per_seed.resize(reps);
    parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t r) {
      const std::uint64_t s = derive_seed(seed, "classifier", r);
      AntidoteSet random_rows;
      const AntidoteSet* extra = antidote;
      if (spec.regime == Regime::kRandomComparable) {
        Rng rng = make_rng(s, "random-comparable");
        random_rows = random_comparable(data.train, comparability, rows_for(random_percentage, data.train.rows()), rng);
        extra = &random_rows;
      }
      const auto model = train_regime(rc, data.train, extra, s);
      const Vector p = model.predict(*data.test);
      FairnessReport rep = evaluate_scores(std::span<const double>(p.data(), p.size()), data.test->labels, test_pairs);
      rep.regime = regime_name(spec.regime);
      rep.classifier = classifier_name(spec.kind);
      rep.antidote_percentage = extra ? antidote_percentage(*extra, data.train.rows()) : 0.0;
      out.per_seed[r] = rep;
    });
    out.report = average_reports(out.per_seed);
    out.ok = true;
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
    log_warning("regime " + spec.name() + " failed: " + out.error);
  }
  return out;
}

std::vector<RegimeOutcome> cmd_experiment(const ExperimentConfig& cfg) {
  const PreparedData d = prepare_data(cfg);
  if (!d.test) throw ConfigError("experiment needs a test split (key 'test')");
  fs::create_directories(cfg.output_dir);
  const auto test_pairs = mine_pairs(*d.test, cfg.comparability);

  // Anti regimes and antidro regimes draw nested subsets of one pool.
  std::optional<AntidoteSet> antidote, antidro_set;
  const bool wants_anti = std::any_of(cfg.regimes.begin(), cfg.regimes.end(), [](const RegimeSpec& r) {
    return needs_antidote(r.regime) && r.regime != Regime::kAntiDro;
  });
  const bool wants_dro = std::any_of(cfg.regimes.begin(), cfg.regimes.end(),
                                     [](const RegimeSpec& r) { return r.regime == Regime::kAntiDro; });
  if (wants_anti || wants_dro) {
    auto b = obtain_bundle(cfg, d);
    SampleOptions opt = cfg.sampling;
    opt.target_percentage = std::max(wants_anti ? cfg.sampling.target_percentage : 0.0,
                                     wants_dro ? cfg.antidro_percentage : 0.0);
    opt.seed = derive_seed(cfg.seed, "sample");
    const auto pool = sample_antidotes(b.model, d.train, cfg.comparability, opt).set;
    std::vector<std::size_t> order(pool.source.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(cfg.seed, "experiment.order");
    std::shuffle(order.begin(), order.end(), rng);
    auto prefix = [&](double pct) {
      std::vector<std::size_t> take(order.begin(),
                                    order.begin() + std::min(order.size(), rows_for(pct, d.train.rows())));
      std::sort(take.begin(), take.end());
      return select_antidotes(pool, take);
    };
    if (wants_anti) {
      antidote = prefix(cfg.sampling.target_percentage);
      write_file_atomic(cfg.output_dir / "antidote.csv", antidote_to_csv(*antidote, d.schema));
    }
    if (wants_dro) {
      antidro_set = prefix(cfg.antidro_percentage);
      write_file_atomic(cfg.output_dir / "antidote_antidro.csv", antidote_to_csv(*antidro_set, d.schema));
    }
  }

  std::vector<RegimeOutcome> outcomes;
  for (const auto& spec : cfg.regimes) {
    log_info("running " + spec.name());
    const auto& set = spec.regime == Regime::kAntiDro ? antidro_set : antidote;
    outcomes.push_back(run_regime(spec, cfg.classifier, d, test_pairs, set ? &*set : nullptr, cfg.comparability,
                                  cfg.random_percentage, cfg.repetitions, derive_seed(cfg.seed, "regime"),
                                  cfg.threads));
  }
  std::vector<FairnessReport> ok;
  std::string csv = report_csv_header();
  for (const auto& o : outcomes) {
    if (!o.ok) continue;
    ok.push_back(o.report);
    csv += report_csv_row(o.report);
  }
  write_file_atomic(cfg.output_dir / "reports.json", reports_to_json(ok));
  write_file_atomic(cfg.output_dir / "reports.csv", csv);
  write_file_atomic(cfg.output_dir / "delta.csv", delta_table_csv(outcomes));
  return outcomes;
}

namespace {

struct MetricValue {
  const char* name;
  std::optional<double> value;
};

std::vector<MetricValue> metric_values(const FairnessReport& r) {
  const auto& h = r.comp.headline;
  auto mean = [](const std::optional<GapStats>& g) { return g ? std::optional<double>(g->mean) : std::nullopt; };
  auto q3 = [](const std::optional<GapStats>& g) { return g ? std::optional<double>(g->q3) : std::nullopt; };
  return {{"roc", r.roc},
          {"ap", r.ap},
          {"pos_mean", mean(h.positive)},
          {"pos_q3", q3(h.positive)},
          {"neg_mean", mean(h.negative)},
          {"neg_q3", q3(h.negative)},
          {"accuracy", r.classification.accuracy},
          {"balanced_accuracy", r.classification.balanced_accuracy},
          {"f1", r.classification.f1}};
}

std::string fmt_opt(std::optional<double> v) { return v ? fmt::format("{:.6f}", *v) : std::string(); }

}  // namespace

std::string delta_table_csv(const std::vector<RegimeOutcome>& outcomes) {
  std::string out = "classifier,regime,status,metric,value,base,delta_percent\n";
  for (const auto& o : outcomes) {
    const RegimeOutcome* base = nullptr;
    for (const auto& b : outcomes) {
      if (b.ok && b.spec.kind == o.spec.kind && b.spec.regime == Regime::kBase) base = &b;
    }
    const std::string cls = classifier_name(o.spec.kind);
    const std::string reg = regime_name(o.spec.regime);
    if (!o.ok) {
      out += fmt::format("{},{},failed,,,,\n", cls, reg);
      continue;
    }
    const auto values = metric_values(o.report);
    std::vector<MetricValue> base_values;
    if (base) base_values = metric_values(base->report);
    for (std::size_t k = 0; k < values.size(); ++k) {
      std::optional<double> b = base ? base_values[k].value : std::nullopt;
      std::optional<double> delta;
      if (values[k].value && b && *b != 0.0) delta = 100.0 * (*values[k].value - *b) / *b;
      if (base == &o && values[k].value) delta = 0.0;
      out += fmt::format("{},{},ok,{},{},{},{}\n", cls, reg, values[k].name, fmt_opt(values[k].value), fmt_opt(b),
                         fmt_opt(delta));
    }
  }
  return out;
}

std::vector<TradeoffRow> cmd_tradeoff(const ExperimentConfig& cfg) {
  const PreparedData d = prepare_data(cfg);
  if (!d.test) throw ConfigError("tradeoff needs a test split (key 'test')");
  fs::create_directories(cfg.output_dir);
  const auto test_pairs = mine_pairs(*d.test, cfg.comparability);
  const double top = cfg.tradeoff_percentages.empty()
                         ? 0.0
                         : *std::max_element(cfg.tradeoff_percentages.begin(), cfg.tradeoff_percentages.end());
  AntidoteSet pool = empty_antidote_set(d.train);
  if (top > 0) {
    auto b = obtain_bundle(cfg, d);
    SampleOptions opt = cfg.sampling;
    opt.target_percentage = top;
    opt.seed = derive_seed(cfg.seed, "sample");
    pool = sample_antidotes(b.model, d.train, cfg.comparability, opt).set;
  }
  // Nested subsets: each percentage takes a prefix of one random order.
  std::vector<std::size_t> order(pool.source.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(cfg.seed, "tradeoff.order");
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<TradeoffRow> rows;
  for (double pct : cfg.tradeoff_percentages) {
    std::vector<std::size_t> take(order.begin(), order.begin() + std::min(order.size(), rows_for(pct, d.train.rows())));
    std::sort(take.begin(), take.end());
    const AntidoteSet subset = select_antidotes(pool, take);
    for (const auto& spec : cfg.tradeoff_regimes) {
      const auto o = run_regime(spec, cfg.classifier, d, test_pairs, &subset, cfg.comparability,
                                cfg.random_percentage, cfg.repetitions, derive_seed(cfg.seed, "regime"), cfg.threads);
      TradeoffRow row;
      row.percentage = pct;
      row.spec = spec;
      row.ok = o.ok && o.report.comp.headline.positive && o.report.comp.headline.negative;
      if (row.ok) {
        row.roc = o.report.roc;
        row.pos_mean = o.report.comp.headline.positive->mean;
        row.neg_mean = o.report.comp.headline.negative->mean;
        double var = 0.0;
        for (const auto& r : o.per_seed) var += std::pow(r.comp.headline.positive->mean - row.pos_mean, 2);
        row.pos_mean_variance = o.per_seed.size() > 1 ? var / static_cast<double>(o.per_seed.size() - 1) : 0.0;
      }
      rows.push_back(row);
    }
  }
  write_file_atomic(cfg.output_dir / "tradeoff.csv", tradeoff_csv(rows));
  return rows;
}

std::string tradeoff_csv(const std::vector<TradeoffRow>& rows) {
  std::string out = "percentage,classifier,regime,status,roc,pos_mean,neg_mean,pos_mean_variance\n";
  for (const auto& r : rows) {
    if (!r.ok) {
      out += fmt::format("{},{},{},failed,,,,\n", r.percentage, classifier_name(r.spec.kind), regime_name(r.spec.regime));
      continue;
    }
    out += fmt::format("{},{},{},ok,{:.6f},{:.6f},{:.6f},{:.6f}\n", r.percentage, classifier_name(r.spec.kind),
                       regime_name(r.spec.regime), r.roc, r.pos_mean, r.neg_mean, r.pos_mean_variance);
  }
  return out;
}

}  // namespace antidote
