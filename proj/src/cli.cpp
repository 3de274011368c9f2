#include "sumreward/cli.hpp"

#include "sumreward/common.hpp"
#include "sumreward/corpus.hpp"
#include "sumreward/embeddings.hpp"
#include "sumreward/eval.hpp"
#include "sumreward/metrics.hpp"
#include "sumreward/reward_model.hpp"
#include "sumreward/rl_summarizer.hpp"
#include "sumreward/scorers.hpp"
#include "sumreward/simred.hpp"
#include "sumreward/text.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <variant>

namespace sumreward::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << content;
  if (!out) throw DataError("failed writing file: " + path);
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

// Written as <primary output>.manifest.json.
struct RunManifest {
  std::string command;
  json config = json::object();
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  void write_next_to(const std::string& primary) const {
    json j{{"command", command},          {"config", config},   {"seed", seed},
           {"inputs", inputs},            {"outputs", outputs}, {"tool_version", kToolVersion},
           {"created_at", utc_timestamp()}};
    write_file(primary + ".manifest.json", j.dump(2) + "\n");
  }
};

std::string format_number(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

// Encoder selection shared by every subcommand that embeds text.
struct EncoderFlags {
  std::string kind = "pmeans";
  std::string vectors;
  std::string pvalues;
  std::size_t vocab_limit = 0;
  std::string embeddings;

  void add_to(CLI::App* app) {
    app->add_option("--encoder", kind, "pmeans or external")
        ->check(CLI::IsMember({"pmeans", "external"}))
        ->capture_default_str();
    app->add_option("--vectors", vectors, "word-vector text file (pmeans)");
    app->add_option("--pvalues", pvalues, "power-mean exponents, e.g. -inf,inf,1,2 (pmeans)");
    app->add_option("--vocab-limit", vocab_limit, "read only the first N word vectors (0 = all)");
    app->add_option("--embeddings", embeddings, "precomputed embeddings JSON (external)");
  }

  std::unique_ptr<embeddings::TextEncoder> make() const {
    if (kind == "external") {
      if (embeddings.empty()) throw UsageError("--encoder external needs --embeddings");
      return std::make_unique<embeddings::ExternalEncoder>(
          embeddings::ExternalEncoder::from_file(embeddings));
    }
    if (vectors.empty()) throw UsageError("--encoder pmeans needs --vectors");
    embeddings::PMeansConfig cfg;
    if (!pvalues.empty()) {
      try {
        cfg = embeddings::PMeansConfig::parse(pvalues);
      } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("--pvalues: ") + e.what());
      }
    }
    std::optional<std::size_t> limit;
    if (vocab_limit > 0) limit = vocab_limit;
    return std::make_unique<embeddings::PMeansEncoder>(
        embeddings::PMeansEncoder::from_file(vectors, cfg, limit));
  }

  bool configured() const { return kind == "external" ? !embeddings.empty() : !vectors.empty(); }

  std::vector<std::string> input_files() const {
    if (kind == "external") return {embeddings};
    return {vectors};
  }

  json to_json() const {
    json j{{"encoder", kind}};
    if (kind == "external") {
      j["embeddings"] = embeddings;
    } else {
      j["vectors"] = vectors;
      j["pvalues"] = pvalues.empty() ? embeddings::PMeansConfig{}.to_string() : pvalues;
      j["vocab_limit"] = vocab_limit;
    }
    return j;
  }
};

struct TrainFlags {
  std::string loss = "preference";
  reward::TrainConfig cfg;
  double alpha = 0.85;

  void add_to(CLI::App* app) {
    app->add_option("--loss", loss, "mse or preference")
        ->check(CLI::IsMember({"mse", "preference"}))
        ->capture_default_str();
    app->add_option("--lr", cfg.learning_rate, "learning rate")->capture_default_str();
    app->add_option("--epochs", cfg.epochs, "training epochs")->capture_default_str();
    app->add_option("--batch-size", cfg.batch_size, "minibatch size")->capture_default_str();
    app->add_option("--hidden", cfg.hidden_dim, "MLP hidden width")->capture_default_str();
    app->add_option("--patience", cfg.early_stop_patience, "early-stopping patience in epochs")
        ->capture_default_str();
    app->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    app->add_option("--alpha", alpha, "SimRed similarity weight")->capture_default_str();
  }

  reward::TrainConfig config() const {
    reward::TrainConfig c = cfg;
    c.loss = reward::parse_loss(loss);
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw UsageError("--alpha must be in [0, 1]");
    return c;
  }

  json to_json() const {
    json j = config().to_json();
    j["alpha"] = alpha;
    return j;
  }
};

// Either reward kind read back from a model file.
using LoadedModel = std::variant<reward::RewardModel, reward::SimRedModel>;

LoadedModel load_any_model(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError("model file " + path + ": " + e.what());
  }
  const auto type = j.value("model_type", std::string("mlp"));
  if (type == "simred") return reward::simred_model_from_json(j);
  if (type == "mlp") return reward::reward_model_from_json(j);
  throw DataError("model file " + path + ": unknown model_type '" + type + "'");
}

const embeddings::EncoderSpec& spec_of(const LoadedModel& m) {
  return std::visit([](const auto& model) -> const embeddings::EncoderSpec& { return model.encoder_spec; },
                    m);
}

std::optional<double> best_val_spearman(const reward::TrainingReport& r) {
  if (r.best_epoch < 0) return std::nullopt;
  return r.val_spearman.at(static_cast<std::size_t>(r.best_epoch));
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

const corpus::FoldSplit& pick_fold(const std::vector<corpus::FoldSplit>& folds, int index) {
  for (const auto& f : folds) {
    if (f.fold_index == index) return f;
  }
  throw UsageError("--fold " + std::to_string(index) + " is not in the fold list");
}

std::vector<corpus::FoldSplit> folds_for(const corpus::Dataset& ds, const std::string& folds_path,
                                         int k, std::uint64_t seed) {
  if (!folds_path.empty()) return corpus::load_folds(folds_path);
  if (k < 2) throw UsageError("--k must be at least 2");
  try {
    return corpus::split_folds(ds, k, seed);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

// ---------------------------------------------------------------- make-folds

struct MakeFoldsArgs {
  std::string dataset;
  int k = 5;
  std::uint64_t seed = 0;
  std::string out;
};

int make_folds(const MakeFoldsArgs& a, std::ostream&) {
  const auto ds = corpus::load_dataset(a.dataset);
  const auto folds = folds_for(ds, "", a.k, a.seed);
  std::ostringstream buf;
  corpus::write_folds(buf, folds);
  write_file(a.out, buf.str());
  RunManifest m{"make-folds", {{"k", a.k}}, a.seed, {a.dataset}, {a.out}};
  m.write_next_to(a.out);
  return kExitOk;
}

// -------------------------------------------------------------- train-reward

struct TrainRewardArgs {
  std::string dataset;
  std::string folds;
  int fold = 0;
  int k = 5;
  std::string model = "mlp";
  EncoderFlags encoder;
  TrainFlags train;
  std::string out;
  std::string report;
};

int train_reward(const TrainRewardArgs& a, std::ostream&) {
  const auto cfg = a.train.config();
  const auto ds = corpus::load_dataset(a.dataset);
  const auto folds = folds_for(ds, a.folds, a.k, cfg.seed);
  const auto& split = pick_fold(folds, a.fold);
  const auto encoder = a.encoder.make();

  json report{{"model", a.model}, {"fold", split.fold_index}, {"config", a.train.to_json()}};
  reward::TrainingReport training;
  eval::SummaryScorer test_scorer;
  std::optional<LoadedModel> model;
  if (a.model == "mlp") {
    auto trained = reward::train_reward_model(ds, split, *encoder, cfg);
    model = std::move(trained.model);
    training = std::move(trained.report);
    reward::save_model(a.out, std::get<reward::RewardModel>(*model));
    test_scorer = scorers::learned_scorer(std::get<reward::RewardModel>(*model), *encoder);
  } else {
    auto trained = reward::train_simred(ds, split, *encoder, cfg, a.train.alpha);
    model = std::move(trained.model);
    training = std::move(trained.report);
    write_file(a.out, reward::to_json(std::get<reward::SimRedModel>(*model)).dump(1) + "\n");
    test_scorer = scorers::simred_scorer(std::get<reward::SimRedModel>(*model), *encoder);
  }
  report["training"] = training.to_json();
  report["val_spearman"] = optional_json(best_val_spearman(training));
  if (!split.test_ids.empty()) {
    report["test"] = eval::to_json(eval::evaluate_scorer(ds, test_scorer, split.test_ids));
  }
  const std::string report_path = a.report.empty() ? a.out + ".report.json" : a.report;
  write_file(report_path, report.dump(2) + "\n");

  RunManifest m{"train-reward", report["config"], cfg.seed, {a.dataset}, {a.out, report_path}};
  m.config["model"] = a.model;
  m.config["fold"] = a.fold;
  m.config.update(a.encoder.to_json());
  if (!a.folds.empty()) m.inputs.push_back(a.folds);
  for (const auto& f : a.encoder.input_files()) m.inputs.push_back(f);
  m.write_next_to(a.out);
  return kExitOk;
}

// --------------------------------------------------------------- eval-reward

struct EvalRewardArgs {
  std::string dataset;
  std::string scorer;
  EncoderFlags encoder;
  TrainFlags train;
  int cv = 0;
  std::string folds;
  double threshold = 0.5;
  std::string reference_system = "reference";
  std::string dump;
  unsigned jobs = 1;
  std::string out;
};

struct DumpRow {
  std::string id;
  double score = 0.0;
  double rating = 0.0;
  std::optional<int> fold;
};

void collect_dump(const eval::ScoredSummaries& scored, const scorers::ReferenceSplit* refs,
                  std::optional<int> fold, std::vector<DumpRow>& rows) {
  for (std::size_t a = 0; a < scored.articles.size(); ++a) {
    const auto& article = *scored.articles[a];
    for (std::size_t i = 0; i < scored.scores[a].size(); ++i) {
      const std::size_t original = refs ? refs->original_index.at(article.article_id).at(i) : i;
      rows.push_back({embeddings::summary_id(article.article_id, original), scored.scores[a][i],
                      scored.ratings[a][i], fold});
    }
  }
}

eval::ScoredSummaries subset(const eval::ScoredSummaries& all, const std::vector<std::string>& ids) {
  std::map<std::string, std::size_t> at;
  for (std::size_t a = 0; a < all.articles.size(); ++a) at.emplace(all.articles[a]->article_id, a);
  eval::ScoredSummaries out;
  for (const auto& id : ids) {
    const auto it = at.find(id);
    if (it == at.end()) throw DataError("fold id not in dataset: " + id);
    out.articles.push_back(all.articles[it->second]);
    out.scores.push_back(all.scores[it->second]);
    out.ratings.push_back(all.ratings[it->second]);
  }
  return out;
}

int eval_reward(const EvalRewardArgs& a, std::ostream& out) {
  const auto input = corpus::load_dataset(a.dataset);
  const std::string& spec = a.scorer;
  const bool trains = spec == "train:mlp" || spec == "train:simred";
  const bool needs_refs = scorers::is_reference_metric(spec) || spec == "cosine";
  const bool needs_encoder = !scorers::is_reference_metric(spec);
  if (!trains && !needs_refs && spec != "simred" && spec.rfind("learned:", 0) != 0) {
    throw UsageError("unknown --scorer '" + spec + "'");
  }
  if (trains && a.cv == 0 && a.folds.empty()) throw UsageError("--scorer " + spec + " needs --cv or --folds");
  if (a.jobs == 0) throw UsageError("--jobs must be at least 1");

  std::optional<scorers::ReferenceSplit> refs;
  if (needs_refs) refs = scorers::split_references(input, a.reference_system);
  const corpus::Dataset& ds = refs ? refs->dataset : input;

  std::unique_ptr<embeddings::TextEncoder> encoder;
  if (needs_encoder) encoder = a.encoder.make();

  std::optional<LoadedModel> fixed_model;
  eval::SummaryScorer fixed;
  std::optional<reward::SimRedModel> identity;
  if (scorers::is_reference_metric(spec)) {
    fixed = scorers::reference_metric_scorer(spec, *refs);
  } else if (spec == "cosine") {
    fixed = scorers::cosine_scorer(*encoder, *refs);
  } else if (spec == "simred") {
    if (!(a.train.alpha >= 0.0 && a.train.alpha <= 1.0)) throw UsageError("--alpha must be in [0, 1]");
    identity = reward::SimRedModel{{a.train.alpha, Matrix()}, encoder->spec()};
    fixed = scorers::simred_scorer(*identity, *encoder);
  } else if (!trains) {
    fixed_model = load_any_model(spec.substr(std::string("learned:").size()));
    if (const auto* mlp = std::get_if<reward::RewardModel>(&*fixed_model)) {
      fixed = scorers::learned_scorer(*mlp, *encoder);
    } else {
      fixed = scorers::simred_scorer(std::get<reward::SimRedModel>(*fixed_model), *encoder);
    }
  }

  std::vector<corpus::FoldSplit> folds;
  if (!a.folds.empty() || a.cv > 0) {
    folds = folds_for(ds, a.folds, a.cv, a.train.cfg.seed);
  }

  eval::EvalReport report;
  std::vector<DumpRow> rows;
  const auto* ref_ptr = refs ? &*refs : nullptr;
  if (trains) {
    const auto cfg = a.train.config();
    for (const auto& split : folds) {
      eval::SummaryScorer scorer;
      std::optional<LoadedModel> model;
      if (spec == "train:mlp") {
        model = reward::train_reward_model(ds, split, *encoder, cfg).model;
        scorer = scorers::learned_scorer(std::get<reward::RewardModel>(*model), *encoder);
      } else {
        model = reward::train_simred(ds, split, *encoder, cfg, a.train.alpha).model;
        scorer = scorers::simred_scorer(std::get<reward::SimRedModel>(*model), *encoder);
      }
      const auto scored = eval::score_summaries(ds, scorer, split.test_ids, a.jobs);
      report.per_fold.push_back(eval::evaluate(scored.scores, scored.ratings, a.threshold));
      collect_dump(scored, ref_ptr, split.fold_index, rows);
    }
    report.summary = eval::mean_over_folds(report.per_fold);
  } else {
    const auto all = eval::score_summaries(ds, fixed, {}, a.jobs);
    if (folds.empty()) {
      report.summary = eval::evaluate(all.scores, all.ratings, a.threshold);
      collect_dump(all, ref_ptr, std::nullopt, rows);
    } else {
      for (const auto& split : folds) {
        const auto part = subset(all, split.test_ids);
        report.per_fold.push_back(eval::evaluate(part.scores, part.ratings, a.threshold));
        collect_dump(part, ref_ptr, split.fold_index, rows);
      }
      report.summary = eval::mean_over_folds(report.per_fold);
    }
  }

  const std::string rendered = eval::to_json(report).dump(2) + "\n";
  if (a.out.empty()) {
    out << rendered;
  } else {
    write_file(a.out, rendered);
  }
  if (!a.dump.empty()) {
    std::string lines;
    for (const auto& r : rows) {
      json j{{"id", r.id}, {"score", r.score}, {"rating", r.rating}};
      if (r.fold) j["fold"] = *r.fold;
      lines += j.dump() + "\n";
    }
    write_file(a.dump, lines);
  }

  RunManifest m{"eval-reward",
                {{"scorer", spec},
                 {"cv", a.cv},
                 {"threshold", a.threshold},
                 {"reference_system", a.reference_system},
                 {"jobs", a.jobs}},
                a.train.cfg.seed,
                {a.dataset},
                {}};
  if (needs_encoder) m.config.update(a.encoder.to_json());
  if (trains) m.config["training"] = a.train.to_json();
  if (!a.folds.empty()) m.inputs.push_back(a.folds);
  if (needs_encoder) {
    for (const auto& f : a.encoder.input_files()) m.inputs.push_back(f);
  }
  if (!a.out.empty()) m.outputs.push_back(a.out);
  if (!a.dump.empty()) m.outputs.push_back(a.dump);
  if (!m.outputs.empty()) m.write_next_to(m.outputs.front());
  return kExitOk;
}

// --------------------------------------------------------------------- score

struct ScoreArgs {
  std::string model;
  std::string article;
  std::string summary;
  std::string article_id;
  std::string summary_id;
  EncoderFlags encoder;
};

int score_command(const ScoreArgs& a, std::ostream& out) {
  const auto model = load_any_model(a.model);
  const auto encoder = a.encoder.make();
  const std::string article = read_file(a.article);
  const std::string summary = read_file(a.summary);
  double value = 0.0;
  if (const auto* mlp = std::get_if<reward::RewardModel>(&model)) {
    value = reward::score(*mlp, *encoder, article, summary, a.article_id, a.summary_id);
  } else {
    value = reward::score(std::get<reward::SimRedModel>(model), *encoder, article, summary);
  }
  out << format_number(value) << '\n';
  return kExitOk;
}

// ----------------------------------------------------------------- summarize

struct SummarizeArgs {
  std::string document;
  std::string reward = "simred";
  EncoderFlags encoder;
  rl::EpisodeConfig episode;
  std::string scheme = "delayed";
  double alpha = 0.85;
  std::string out;
  std::string trace;
};

int summarize_command(const SummarizeArgs& a, std::ostream& out) {
  rl::EpisodeConfig cfg = a.episode;
  cfg.reward_scheme = rl::parse_scheme(a.scheme);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const bool learned = a.reward.rfind("learned:", 0) == 0;
  const bool rouge = a.reward.rfind("rouge:", 0) == 0;
  if (!learned && !rouge && a.reward != "simred") throw UsageError("unknown --reward '" + a.reward + "'");

  const auto encoder = a.encoder.make();
  const auto doc = rl::encode_document(read_file(a.document), *encoder);

  std::optional<LoadedModel> model;
  std::vector<std::string> inputs{a.document};
  rl::DraftReward reward_fn;
  if (learned) {
    const auto path = a.reward.substr(std::string("learned:").size());
    inputs.push_back(path);
    model = load_any_model(path);
    reward::check_encoder(spec_of(*model), encoder->spec());
    if (const auto* mlp = std::get_if<reward::RewardModel>(&*model)) {
      reward_fn = rl::learned_draft_reward(*mlp, doc);
    } else {
      reward_fn = rl::simred_draft_reward(std::get<reward::SimRedModel>(*model).config, doc);
    }
  } else if (rouge) {
    const auto path = a.reward.substr(std::string("rouge:").size());
    inputs.push_back(path);
    reward_fn = rl::rouge_draft_reward(read_file(path), doc);
  } else {
    if (!(a.alpha >= 0.0 && a.alpha <= 1.0)) throw UsageError("--alpha must be in [0, 1]");
    reward_fn = rl::simred_draft_reward({a.alpha, Matrix()}, doc);
  }

  const auto result = rl::summarize(doc, reward_fn, cfg);
  if (a.out.empty()) {
    out << result.summary << '\n';
  } else {
    write_file(a.out, result.summary + "\n");
  }
  if (!a.trace.empty()) {
    std::string lines;
    for (const auto& t : result.trace) lines += rl::to_json(t).dump() + "\n";
    write_file(a.trace, lines);
  }

  RunManifest m{"summarize", cfg.to_json(), cfg.seed, inputs, {}};
  m.config["reward"] = a.reward;
  m.config.update(a.encoder.to_json());
  for (const auto& f : a.encoder.input_files()) m.inputs.push_back(f);
  if (!a.out.empty()) m.outputs.push_back(a.out);
  if (!a.trace.empty()) m.outputs.push_back(a.trace);
  if (!m.outputs.empty()) m.write_next_to(m.outputs.front());
  return kExitOk;
}

// --------------------------------------------------------------------- rouge

struct RougeArgs {
  std::string candidate;
  std::string reference;
  std::string out;
};

json metric_report(const std::string& candidate, const std::string& reference) {
  const auto opts = text::PreprocessOptions::for_metrics();
  const auto cand = text::tokenize_text(candidate, opts);
  const auto ref = text::tokenize_text(reference, opts);
  auto as_json = [](const metrics::MetricScore& s) {
    return json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
  };
  using metrics::RougeVariant;
  json j;
  j["rouge1"] = as_json(metrics::rouge(cand, ref, RougeVariant::rouge_n(1)));
  j["rouge2"] = as_json(metrics::rouge(cand, ref, RougeVariant::rouge_n(2)));
  j["rougeL"] = as_json(metrics::rouge(cand, ref, RougeVariant::rouge_l()));
  j["rougeSU4"] = as_json(metrics::rouge(cand, ref, RougeVariant::rouge_su4()));
  for (std::size_t n = 1; n <= 5; ++n) {
    j["bleu" + std::to_string(n)] = metrics::bleu(cand.flat_tokens, ref.flat_tokens, n);
  }
  return j;
}

int rouge_command(const RougeArgs& a, std::ostream& out) {
  const std::string rendered =
      metric_report(read_file(a.candidate), read_file(a.reference)).dump(2) + "\n";
  if (a.out.empty()) {
    out << rendered;
    return kExitOk;
  }
  write_file(a.out, rendered);
  RunManifest m{"rouge", json::object(), 0, {a.candidate, a.reference}, {a.out}};
  m.write_next_to(a.out);
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learned summary rewards: training, evaluation and RL summarization", "sumreward"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  MakeFoldsArgs mf;
  auto* c_folds = app.add_subcommand("make-folds", "split a dataset into cross-validation folds");
  c_folds->add_option("--dataset", mf.dataset, "dataset JSON-lines file")->required();
  c_folds->add_option("--k", mf.k, "number of folds")->capture_default_str();
  c_folds->add_option("--seed", mf.seed, "shuffle seed")->capture_default_str();
  c_folds->add_option("--out", mf.out, "fold file to write")->required();

  TrainRewardArgs tr;
  auto* c_train = app.add_subcommand("train-reward", "train a reward model on one fold");
  c_train->add_option("--dataset", tr.dataset, "dataset JSON-lines file")->required();
  c_train->add_option("--folds", tr.folds, "fold file (default: split with --k and --seed)");
  c_train->add_option("--fold", tr.fold, "fold index to train on")->capture_default_str();
  c_train->add_option("--k", tr.k, "folds to generate when --folds is absent")->capture_default_str();
  c_train->add_option("--model", tr.model, "mlp or simred")
      ->check(CLI::IsMember({"mlp", "simred"}))
      ->capture_default_str();
  tr.encoder.add_to(c_train);
  tr.train.add_to(c_train);
  c_train->add_option("--out", tr.out, "model file to write")->required();
  c_train->add_option("--report", tr.report, "training report (default: <out>.report.json)");

  EvalRewardArgs er;
  auto* c_eval = app.add_subcommand("eval-reward", "correlate a scorer with human ratings");
  c_eval->add_option("--dataset", er.dataset, "dataset JSON-lines file")->required();
  c_eval
      ->add_option("--scorer", er.scorer,
                   "learned:<model>, simred, cosine, rouge1, rouge2, rougeL, rougeSU4, bleu1..bleu5, "
                   "train:mlp or train:simred")
      ->required();
  er.encoder.add_to(c_eval);
  er.train.add_to(c_eval);
  c_eval->add_option("--cv", er.cv, "cross-validate over k folds (0 = whole dataset)")
      ->capture_default_str();
  c_eval->add_option("--folds", er.folds, "fold file for cross-validation");
  c_eval->add_option("--threshold", er.threshold, "good-summary rating threshold")->capture_default_str();
  c_eval->add_option("--reference-system", er.reference_system, "system id of reference summaries")
      ->capture_default_str();
  c_eval->add_option("--dump", er.dump, "per-summary scores as JSON lines");
  c_eval->add_option("--jobs", er.jobs, "scoring threads")->capture_default_str();
  c_eval->add_option("--out", er.out, "report file (default: standard output)");

  ScoreArgs sc;
  auto* c_score = app.add_subcommand("score", "score one summary with a trained reward");
  c_score->add_option("--model", sc.model, "model file")->required();
  c_score->add_option("--article", sc.article, "article text file")->required();
  c_score->add_option("--summary", sc.summary, "summary text file")->required();
  c_score->add_option("--article-id", sc.article_id, "embedding id of the article (external)");
  c_score->add_option("--summary-id", sc.summary_id, "embedding id of the summary (external)");
  sc.encoder.add_to(c_score);

  SummarizeArgs sm;
  auto* c_sum = app.add_subcommand("summarize", "extractive RL summary of one document");
  c_sum->add_option("--document", sm.document, "document text file")->required();
  c_sum->add_option("--reward", sm.reward, "learned:<model>, simred or rouge:<reference file>")
      ->capture_default_str();
  sm.encoder.add_to(c_sum);
  c_sum->add_option("--budget", sm.episode.token_budget, "token budget")->capture_default_str();
  c_sum->add_option("--episodes", sm.episode.episodes, "training episodes")->capture_default_str();
  c_sum->add_option("--seed", sm.episode.seed, "random seed")->capture_default_str();
  c_sum->add_option("--scheme", sm.scheme, "delayed or stepwise")
      ->check(CLI::IsMember({"delayed", "stepwise"}))
      ->capture_default_str();
  c_sum->add_option("--lead-bonus", sm.episode.lead_bonus, "bonus per lead sentence")
      ->capture_default_str();
  c_sum->add_option("--lead-k", sm.episode.lead_k, "sentences that count as lead")
      ->capture_default_str();
  c_sum->add_option("--lr", sm.episode.learning_rate, "value network learning rate")
      ->capture_default_str();
  c_sum->add_option("--gamma", sm.episode.gamma, "discount")->capture_default_str();
  c_sum->add_option("--alpha", sm.alpha, "SimRed similarity weight")->capture_default_str();
  c_sum->add_option("--out", sm.out, "summary file (default: standard output)");
  c_sum->add_option("--trace", sm.trace, "per-episode trace as JSON lines");

  RougeArgs rg;
  auto* c_rouge = app.add_subcommand("rouge", "ROUGE and BLEU between two texts");
  c_rouge->add_option("--candidate", rg.candidate, "candidate text file")->required();
  c_rouge->add_option("--reference", rg.reference, "reference text file")->required();
  c_rouge->add_option("--out", rg.out, "report file (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* active = app.get_subcommands().front();
  try {
    if (active == c_folds) return make_folds(mf, out);
    if (active == c_train) return train_reward(tr, out);
    if (active == c_eval) return eval_reward(er, out);
    if (active == c_score) return score_command(sc, out);
    if (active == c_sum) return summarize_command(sm, out);
    return rouge_command(rg, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << active->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"sumreward"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace sumreward::cli
