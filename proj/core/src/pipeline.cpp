#include "cited/pipeline.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include <json.hpp>

#include "cited/error.hpp"
#include "cited/hash.hpp"
#include "cited/parallel.hpp"
#include "cited/transport.hpp"

namespace cited {

using json = nlohmann::json;

namespace {

// Walks one JSON object, typing each read and remembering which keys were
// consumed so leftovers can be reported.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    require(j_.is_object(), ErrorCode::ConfigInvalid, where() + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(j_.at(key), field(key));
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    const json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        require(v.is_boolean(), ErrorCode::ConfigInvalid, field(key) + ": expected a boolean");
      } else if constexpr (std::is_floating_point_v<T>) {
        require(v.is_number(), ErrorCode::ConfigInvalid, field(key) + ": expected a number");
      } else if constexpr (std::is_integral_v<T>) {
        require(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0),
                ErrorCode::ConfigInvalid, field(key) + ": expected a nonnegative integer");
      } else if constexpr (std::is_same_v<T, std::string>) {
        require(v.is_string(), ErrorCode::ConfigInvalid, field(key) + ": expected a string");
      }
      out = v.get<T>();
    } catch (const json::exception& e) {
      fail(ErrorCode::ConfigInvalid, field(key) + ": " + e.what());
    }
  }

  template <typename T, typename Parse>
  void read_enum(const std::string& key, T& out, Parse parse) {
    std::string s;
    read(key, s);
    if (s.empty()) return;
    try {
      out = parse(s);
    } catch (const Error&) {
      fail(ErrorCode::ConfigInvalid, field(key) + ": unknown value '" + s + "'");
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      require(seen_.count(it.key()) > 0, ErrorCode::ConfigInvalid,
              field(it.key()) + ": unknown field");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where() const { return path_.empty() ? "<root>" : path_; }
  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void with_path(const std::string& path, const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) fail(ErrorCode::ConfigInvalid, path + ": " + e.what());
    throw;
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!dataset_path) with_path("dataset.sbm", [&] { sbm.validate(); });
  with_path("model.train", [&] { model.train.validate(); });
  require(model.hidden >= 1, ErrorCode::ConfigInvalid, "model.hidden: must be >= 1");
  require(model.restarts >= 1, ErrorCode::ConfigInvalid, "model.restarts: must be >= 1");
  with_path("signature", [&] { signature.validate(); });
  require(!attack.levels.empty(), ErrorCode::ConfigInvalid, "attack.levels: must not be empty");
  require(attack.surrogates >= 1 && attack.independents >= 1, ErrorCode::ConfigInvalid,
          "attack: pools need at least one surrogate and one independent");
  require(attack.query_total >= 1, ErrorCode::ConfigInvalid, "attack.query.total: must be >= 1");
  require(attack.boundary_fraction >= 0.0 && attack.boundary_fraction <= 1.0,
          ErrorCode::ConfigInvalid, "attack.query.boundary_fraction: must be in [0,1]");
  require(attack.temperature > 0.0, ErrorCode::ConfigInvalid, "attack.temperature: must be > 0");
  require(attack.shift_sigma >= 0.0, ErrorCode::ConfigInvalid, "attack.shift_sigma: must be >= 0");
  require(!attack.independent_hidden.empty() &&
              std::all_of(attack.independent_hidden.begin(), attack.independent_hidden.end(),
                          [](std::size_t h) { return h >= 1; }),
          ErrorCode::ConfigInvalid, "attack.independent_hidden: widths must be >= 1");
  require(verify.r >= 1, ErrorCode::ConfigInvalid, "verify.r: must be >= 1");
  require(verify.sinkhorn_eps > 0.0, ErrorCode::ConfigInvalid, "verify.sinkhorn_eps: must be > 0");
  if (bounds.eta)
    require(*bounds.eta >= 0.0, ErrorCode::ConfigInvalid, "bounds.eta: must be >= 0");
  require(bounds.trials >= 1, ErrorCode::ConfigInvalid, "bounds.trials: must be >= 1");
}

ExperimentConfig parse_config(std::string_view text, const fs::path& base_dir) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  Section top(root, "");
  top.read("master_seed", cfg.master_seed);
  top.read("workers", cfg.workers);
  if (top.has("output_dir")) {
    std::string dir;
    top.read("output_dir", dir);
    cfg.output_dir = dir;
  }

  if (top.has("dataset")) {
    Section ds = top.child("dataset");
    if (ds.has("path")) {
      std::string p;
      ds.read("path", p);
      fs::path path(p);
      cfg.dataset_path = path.is_relative() && !base_dir.empty() ? base_dir / path : path;
    }
    if (ds.has("sbm")) {
      require(!cfg.dataset_path, ErrorCode::ConfigInvalid,
              "dataset: give either path or sbm, not both");
      Section s = ds.child("sbm");
      s.read("blocks", cfg.sbm.blocks);
      s.read("nodes_per_block", cfg.sbm.nodes_per_block);
      s.read("p_in", cfg.sbm.p_in);
      s.read("p_out", cfg.sbm.p_out);
      s.read("feat_dim", cfg.sbm.feat_dim);
      s.read("separation", cfg.sbm.class_mean_separation);
      s.read("sigma", cfg.sbm.feat_noise_sigma);
      s.read("train_per_class", cfg.sbm.train_per_class);
      s.read("val_per_class", cfg.sbm.val_per_class);
      s.finish();
    }
    ds.finish();
  }

  if (top.has("model")) {
    Section m = top.child("model");
    m.read("hidden", cfg.model.hidden);
    m.read("restarts", cfg.model.restarts);
    m.read("finetune_epochs", cfg.model.finetune_epochs);
    if (m.has("train")) {
      Section t = m.child("train");
      t.read("lr", cfg.model.train.lr);
      t.read("weight_decay", cfg.model.train.weight_decay);
      t.read("epochs", cfg.model.train.epochs);
      t.read("dropout", cfg.model.train.dropout);
      t.finish();
    }
    m.finish();
  }

  if (top.has("signature")) {
    Section s = top.child("signature");
    BoundaryConfig& b = cfg.signature;
    s.read("lambda", b.lambda);
    s.read("boundary_ratio", b.boundary_ratio);
    s.read("signature_ratio", b.signature_ratio);
    s.read("w_margin", b.w_margin);
    s.read("w_thickness", b.w_thickness);
    s.read("w_hetero", b.w_hetero);
    s.read("gamma", b.gamma);
    s.read_enum("margin_variant", b.margin_variant, margin_variant_from_string);
    s.finish();
  }

  if (top.has("attack")) {
    Section a = top.child("attack");
    AttackSettings& at = cfg.attack;
    if (a.has("levels")) {
      std::vector<std::string> names;
      a.read("levels", names);
      at.levels.clear();
      for (const std::string& n : names) {
        try {
          at.levels.push_back(output_level_from_string(n));
        } catch (const Error&) {
          fail(ErrorCode::ConfigInvalid, "attack.levels: unknown level '" + n + "'");
        }
      }
    }
    a.read("surrogates", at.surrogates);
    a.read("independents", at.independents);
    if (a.has("query")) {
      Section q = a.child("query");
      q.read("total", at.query_total);
      q.read("boundary_fraction", at.boundary_fraction);
      q.finish();
    }
    a.read_enum("removal", at.removal, removal_from_string);
    a.read("temperature", at.temperature);
    a.read("shift_sigma", at.shift_sigma);
    a.read("surrogate_hidden", at.surrogate_hidden);
    a.read("independent_hidden", at.independent_hidden);
    a.finish();
  }

  if (top.has("verify")) {
    Section v = top.child("verify");
    v.read("r", cfg.verify.r);
    v.read("use_sinkhorn", cfg.verify.use_sinkhorn);
    v.read("sinkhorn_eps", cfg.verify.sinkhorn_eps);
    v.read("sinkhorn_iters", cfg.verify.sinkhorn_iters);
    v.finish();
  }

  if (top.has("bounds")) {
    Section b = top.child("bounds");
    if (b.has("eta") && !b.raw("eta").is_null()) {
      double eta = 0.0;
      b.read("eta", eta);
      cfg.bounds.eta = eta;
    }
    b.read("trials", cfg.bounds.trials);
    b.read("grid_points", cfg.bounds.grid_points);
    b.finish();
  }

  top.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  return parse_config(read_text(path), path.parent_path());
}

std::uint64_t stage_seed(const ExperimentConfig& cfg, std::string_view tag) {
  return derive_seed(cfg.master_seed, tag);
}

Dataset make_dataset(const ExperimentConfig& cfg) {
  if (cfg.dataset_path) return load_dataset(*cfg.dataset_path);
  SbmConfig sbm = cfg.sbm;
  sbm.seed = stage_seed(cfg, "dataset");
  return sbm_generate(sbm);
}

TargetBundle train_target(const Dataset& ds, const SparseMatrix& adj, const ExperimentConfig& cfg) {
  const Graph& g = ds.graph;
  TargetBundle out;
  std::vector<ModelParams> candidates;
  for (std::size_t i = 0; i < cfg.model.restarts; ++i) {
    TrainConfig tc = cfg.model.train;
    tc.seed = stage_seed(cfg, "target/" + std::to_string(i));
    ModelParams p = train(g, adj, ds.splits, cfg.model.hidden, tc).params;
    p.provenance = Provenance::target;
    out.restart_val_accuracy.push_back(accuracy(forward(p, adj, g.features()).Z, g.labels(), ds.splits.val));
    candidates.push_back(std::move(p));
  }
  out.chosen_restart = static_cast<std::size_t>(
      std::max_element(out.restart_val_accuracy.begin(), out.restart_val_accuracy.end()) -
      out.restart_val_accuracy.begin());
  out.pretrained = std::move(candidates[out.chosen_restart]);

  const ForwardOutputs before = forward(out.pretrained, adj, g.features());
  const SignatureSet initial = build_signature(before, g, cfg.signature);

  TrainConfig ft = finetune_defaults(stage_seed(cfg, "finetune"), cfg.model.train.dropout);
  ft.epochs = cfg.model.finetune_epochs;
  ft.lr = cfg.model.train.lr;
  ft.weight_decay = cfg.model.train.weight_decay;
  out.deployed = finetune(out.pretrained, adj, g.features(), g.labels(), ds.splits.train,
                          ds.splits.val, ft)
                     .params;
  out.deployed.provenance = Provenance::target;
  out.deployed.seed = out.pretrained.seed;

  const ForwardOutputs after = forward(out.deployed, adj, g.features());
  out.signature = freeze_signature(initial.indices, after);
  out.val_accuracy_pretrained = accuracy(before.Z, g.labels(), ds.splits.val);
  out.val_accuracy_deployed = accuracy(after.Z, g.labels(), ds.splits.val);
  out.train_accuracy_pretrained = accuracy(before.Z, g.labels(), ds.splits.train);
  out.train_accuracy_deployed = accuracy(after.Z, g.labels(), ds.splits.train);
  return out;
}

PoolConfig pool_config(const ExperimentConfig& cfg, OutputLevel level) {
  PoolConfig pc;
  pc.level = level;
  pc.surrogates = cfg.attack.surrogates;
  pc.independents = cfg.attack.independents;
  pc.query_total = cfg.attack.query_total;
  pc.boundary_fraction = cfg.attack.boundary_fraction;
  pc.temperature = cfg.attack.temperature;
  pc.shift_sigma = cfg.attack.shift_sigma;
  pc.removal = cfg.attack.removal;
  pc.train = cfg.model.train;
  pc.surrogate_hidden = cfg.attack.surrogate_hidden;
  pc.independent_hidden = cfg.attack.independent_hidden;
  pc.seed = stage_seed(cfg, "pool");
  pc.workers = cfg.workers;
  return pc;
}

ModelPool attack_target(const Dataset& ds, const SparseMatrix& adj, const ModelParams& target,
                        const ExperimentConfig& cfg, OutputLevel level) {
  return build_pool(ds.graph, adj, ds.splits, target, pool_config(cfg, level));
}

namespace {

MatchScore score_member(const PoolMember& m, Provenance prov, const Matrix& X,
                        const SparseMatrix& adj, const SignatureSet& sig, OutputLevel level,
                        const VerifySettings& vs) {
  const ForwardOutputs out = forward(m.params, adj, X);
  if (level == OutputLevel::label) {
    const auto pred = argmax_rows(select_rows(out.Z, sig.indices));
    return match_label(m.id, prov, pred, sig);
  }
  const Matrix emb = select_rows(out.H, sig.indices);
  if (!vs.use_sinkhorn) return match_embedding(m.id, prov, emb, sig);
  require(emb.cols() == sig.ref_embeddings.cols(), ErrorCode::DimMismatch,
          "suspect embedding width differs from the references");
  MatchScore s;
  s.model_id = m.id;
  s.provenance = prov;
  s.level = level;
  s.value = w2_sinkhorn(emb, sig.ref_embeddings, vs.sinkhorn_eps, vs.sinkhorn_iters).value;
  return s;
}

}  // namespace

VerificationReport evaluate(const Dataset& ds, const SparseMatrix& adj, const SignatureSet& sig,
                            const ModelPool& pool, OutputLevel level, const VerifySettings& vs,
                            std::size_t workers) {
  require(!sig.indices.empty(), ErrorCode::InvalidArgument, "empty signature");
  const std::size_t ns = pool.surrogates.size();
  std::vector<MatchScore> scores(ns + pool.independents.size());
  parallel_for(scores.size(), workers, [&](std::size_t i) {
    const bool pos = i < ns;
    const PoolMember& m = pos ? pool.surrogates[i] : pool.independents[i - ns];
    scores[i] = score_member(m, pos ? Provenance::surrogate : Provenance::independent,
                             ds.graph.features(), adj, sig, level, vs);
  });
  return summarize(level, std::move(scores), vs.r);
}

SignatureSet random_signature(const ForwardOutputs& outputs, std::size_t size, std::uint64_t seed) {
  const std::size_t n = outputs.H.rows();
  require(size >= 1 && size <= n, ErrorCode::InvalidArgument, "control size must be in [1, n]");
  std::vector<NodeId> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<NodeId>(i);
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(size);
  std::sort(all.begin(), all.end());
  return freeze_signature(std::move(all), outputs);
}

BoundsBundle check_bounds(const Dataset& ds, const SparseMatrix& adj, const ModelParams& target,
                          const ExperimentConfig& cfg) {
  const Graph& g = ds.graph;
  BoundsBundle b;
  const double eta2 = cfg.bounds.eta.value_or(1.0 / 4.0);
  const double eta3 = cfg.bounds.eta.value_or(1.0 / 6.0);
  b.lemma = empirical_perturbation_check(target, g, adj, g.features(), eta2, cfg.bounds.trials,
                                         stage_seed(cfg, "bounds/lemma"), cfg.bounds.grid_points);
  std::vector<NodeId> all(g.num_nodes());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<NodeId>(i);
  b.agreement = agreement_check(target, g, adj, g.features(), all, eta3, cfg.bounds.trials,
                                stage_seed(cfg, "bounds/agreement"));
  return b;
}

bool agreement_holds(const BoundReport& r) {
  const double slack = r.trials == 0 ? 0.0 : 1.0 / static_cast<double>(r.trials);
  return r.empirical_agreement + slack >= r.theoretical_agreement_lb;
}

namespace {

constexpr const char* kManifest = "manifest.json";

// Run manifest: one entry per stage with its outputs and seeds.
void record_stage(const ExperimentConfig& cfg, const std::string& stage,
                  const std::vector<std::string>& outputs,
                  const std::map<std::string, std::uint64_t>& seeds) {
  const fs::path path = cfg.output_dir / kManifest;
  json m;
  if (fs::exists(path)) {
    try {
      m = json::parse(read_text(path));
    } catch (const json::exception&) {
      m = json::object();
    }
  }
  m["master_seed"] = cfg.master_seed;
  json s;
  s["outputs"] = outputs;
  s["seeds"] = json::object();
  for (const auto& [k, v] : seeds) s["seeds"][k] = v;
  m["stages"][stage] = std::move(s);
  write_atomic(path, m.dump(2) + "\n");
}

fs::path out_path(const ExperimentConfig& cfg, const std::string& name) {
  return cfg.output_dir / name;
}

fs::path require_artifact(const ExperimentConfig& cfg, const std::string& name) {
  const fs::path p = out_path(cfg, name);
  require(fs::exists(p), ErrorCode::MissingArtifact, "missing artifact: " + p.string());
  return p;
}

struct Loaded {
  Dataset ds;
  SparseMatrix adj;
};

Loaded load_workspace_dataset(const ExperimentConfig& cfg) {
  Loaded l{load_dataset(require_artifact(cfg, "dataset.json")), {}};
  l.adj = normalized_adjacency(l.ds.graph);
  return l;
}

std::string pool_file(OutputLevel level, const std::string& id) {
  return "pool/" + std::string(to_string(level)) + "/" + id + ".json";
}

}  // namespace

void cmd_gen_data(const ExperimentConfig& cfg) {
  if (cfg.dataset_path)
    require(fs::exists(*cfg.dataset_path), ErrorCode::MissingArtifact,
            "missing artifact: " + cfg.dataset_path->string());
  const Dataset ds = make_dataset(cfg);
  save_dataset(out_path(cfg, "dataset.json"), ds);
  record_stage(cfg, "gen-data", {"dataset.json"}, {{"dataset", ds.seed}});
}

void cmd_train_target(const ExperimentConfig& cfg) {
  const Loaded l = load_workspace_dataset(cfg);
  const TargetBundle t = train_target(l.ds, l.adj, cfg);

  TrainConfig tc = cfg.model.train;
  tc.seed = t.pretrained.seed;
  save_model(out_path(cfg, "target_pretrained.json"), {t.pretrained, tc});
  save_model(out_path(cfg, "target.json"), {t.deployed, tc});
  save_signature(out_path(cfg, "signature.json"), {t.signature, cfg.signature});

  CsvWriter csv({"model", "seed", "train_accuracy", "val_accuracy"});
  for (std::size_t i = 0; i < t.restart_val_accuracy.size(); ++i)
    csv.cell("restart_" + std::to_string(i))
        .cell(stage_seed(cfg, "target/" + std::to_string(i)))
        .cell(std::string_view(""))
        .cell(t.restart_val_accuracy[i])
        .end_row();
  csv.cell("pretrained").cell(t.pretrained.seed).cell(t.train_accuracy_pretrained)
      .cell(t.val_accuracy_pretrained).end_row();
  csv.cell("deployed").cell(stage_seed(cfg, "finetune")).cell(t.train_accuracy_deployed)
      .cell(t.val_accuracy_deployed).end_row();
  write_atomic(out_path(cfg, "train_summary.csv"), csv.str());

  record_stage(cfg, "train",
               {"target_pretrained.json", "target.json", "signature.json", "train_summary.csv"},
               {{"target", t.pretrained.seed}, {"finetune", stage_seed(cfg, "finetune")}});
}

void cmd_attack(const ExperimentConfig& cfg) {
  const Loaded l = load_workspace_dataset(cfg);
  const ModelFile target = load_model(require_artifact(cfg, "target.json"));
  std::vector<ManifestEntry> entries;
  std::vector<std::string> outputs{"pool_manifest.json"};
  for (OutputLevel level : cfg.attack.levels) {
    const ModelPool pool = attack_target(l.ds, l.adj, target.params, cfg, level);
    auto emit = [&](const PoolMember& m) {
      const std::string rel = pool_file(level, m.id);
      TrainConfig tc = cfg.model.train;
      tc.seed = m.seed;
      save_model(out_path(cfg, rel), {m.params, tc});
      entries.push_back({m.id, rel, m.params.provenance, m.seed, m.params.hidden_dim(), level,
                         m.removal});
      outputs.push_back(rel);
    };
    for (const PoolMember& m : pool.surrogates) emit(m);
    for (const PoolMember& m : pool.independents) emit(m);
  }
  write_atomic(out_path(cfg, "pool_manifest.json"), manifest_to_json(entries));
  record_stage(cfg, "attack", outputs, {{"pool", stage_seed(cfg, "pool")}});
}

void cmd_verify(const ExperimentConfig& cfg) {
  const Loaded l = load_workspace_dataset(cfg);
  const SignatureFile sig = load_signature(require_artifact(cfg, "signature.json"));
  const auto entries = manifest_from_json(read_text(require_artifact(cfg, "pool_manifest.json")));

  std::map<OutputLevel, ModelPool> pools;
  for (const ManifestEntry& e : entries) {
    PoolMember m;
    m.id = e.id;
    m.params = load_model(require_artifact(cfg, e.path)).params;
    m.seed = e.seed;
    m.level = e.level;
    m.removal = e.removal;
    auto& pool = pools[e.level];
    (e.provenance == Provenance::surrogate ? pool.surrogates : pool.independents)
        .push_back(std::move(m));
  }

  CsvWriter summary({"level", "aruc", "auc", "surrogates", "independents", "signature_size",
                     "master_seed", "pool_seed"});
  std::vector<std::string> outputs;
  for (const auto& [level, pool] : pools) {
    if (pool.surrogates.empty() || pool.independents.empty()) continue;
    const VerificationReport rep = evaluate(l.ds, l.adj, sig.signature, pool, level, cfg.verify,
                                            cfg.workers);
    const std::string tag(to_string(level));

    CsvWriter report({"model_id", "provenance", "level", "raw_score", "normalized_score"});
    for (const MatchScore& s : rep.scores)
      report.cell(s.model_id).cell(to_string(s.provenance)).cell(tag).cell(s.value)
          .cell(s.normalized).end_row();
    CsvWriter curve({"tau", "R", "U", "min"});
    for (std::size_t i = 0; i < rep.curve.thresholds.size(); ++i)
      curve.cell(rep.curve.thresholds[i]).cell(rep.curve.robustness[i])
          .cell(rep.curve.uniqueness[i])
          .cell(std::min(rep.curve.robustness[i], rep.curve.uniqueness[i])).end_row();
    write_atomic(out_path(cfg, "report_" + tag + ".csv"), report.str());
    write_atomic(out_path(cfg, "curve_" + tag + ".csv"), curve.str());
    outputs.push_back("report_" + tag + ".csv");
    outputs.push_back("curve_" + tag + ".csv");

    summary.cell(tag).cell(rep.aruc).cell(rep.auc).cell(rep.positives).cell(rep.negatives)
        .cell(sig.signature.size()).cell(cfg.master_seed).cell(stage_seed(cfg, "pool")).end_row();
  }
  require(!outputs.empty(), ErrorCode::MissingArtifact,
          "pool manifest lists no level with both surrogates and independents");
  write_atomic(out_path(cfg, "summary.csv"), summary.str());
  outputs.push_back("summary.csv");
  record_stage(cfg, "verify", outputs, {{"pool", stage_seed(cfg, "pool")}});
}

void cmd_bounds(const ExperimentConfig& cfg) {
  const Loaded l = load_workspace_dataset(cfg);
  const ModelFile target = load_model(require_artifact(cfg, "target.json"));
  const BoundsBundle b = check_bounds(l.ds, l.adj, target.params, cfg);
  const BoundReport& lm = b.lemma;
  const BoundReport& ag = b.agreement;

  CsvWriter trials({"trial", "deviation", "delta_g", "sigma2", "logit_deviation",
                    "logit_delta_g", "logit_sigma2", "agreement"});
  for (std::size_t t = 0; t < lm.trials; ++t)
    trials.cell(t).cell(lm.deviations[t]).cell(lm.delta_g).cell(lm.sigma2)
        .cell(ag.deviations[t]).cell(ag.delta_g).cell(ag.sigma2).cell(ag.trial_agreement[t])
        .end_row();
  CsvWriter tail({"lambda", "empirical", "theoretical"});
  for (const TailRow& r : lm.tail) tail.cell(r.lambda).cell(r.empirical).cell(r.theoretical).end_row();

  auto echo = [](const BoundReport& r) {
    return json{{"L", r.layers},
                {"spectral_norms", r.spectral_norms},
                {"C_phi", 1.0},
                {"C_rho", 1.0},
                {"C_g", r.adjacency_norm},
                {"d", r.max_degree},
                {"R", r.radius},
                {"eta", r.eta},
                {"delta_g", r.delta_g},
                {"delta_g_generic", r.delta_g_generic},
                {"delta_g_measured", r.delta_g_measured},
                {"sigma2", r.sigma2},
                {"sigma2_measured", r.sigma2_measured},
                {"trials", r.trials},
                {"max_observed_deviation", r.max_observed_deviation},
                {"violations", r.violations}};
  };
  json summary;
  summary["lemma"] = echo(lm);
  summary["agreement"] = echo(ag);
  summary["agreement"]["empirical_agreement"] = ag.empirical_agreement;
  summary["agreement"]["theoretical_agreement_lb"] = ag.theoretical_agreement_lb;
  summary["agreement"]["gamma_min"] = ag.gamma_min;
  bool tail_ok = true;
  const double slack = 1.0 / static_cast<double>(lm.trials);
  for (const TailRow& r : lm.tail) tail_ok = tail_ok && r.empirical + slack >= r.theoretical;
  const bool ok = lm.violations == 0 && ag.violations == 0 && agreement_holds(ag) && tail_ok;
  summary["passed"] = ok;

  write_atomic(out_path(cfg, "bounds_trials.csv"), trials.str());
  write_atomic(out_path(cfg, "bounds_tail.csv"), tail.str());
  write_atomic(out_path(cfg, "bounds_summary.json"), summary.dump(2) + "\n");
  record_stage(cfg, "bounds", {"bounds_trials.csv", "bounds_tail.csv", "bounds_summary.json"},
               {{"lemma", stage_seed(cfg, "bounds/lemma")},
                {"agreement", stage_seed(cfg, "bounds/agreement")}});
  require(ok, ErrorCode::InvariantViolation,
          "perturbation bound violated (see bounds_summary.json)");
}

void cmd_pipeline(const ExperimentConfig& cfg) {
  cmd_gen_data(cfg);
  cmd_train_target(cfg);
  cmd_attack(cfg);
  cmd_verify(cfg);
  cmd_bounds(cfg);
}

}  // namespace cited
