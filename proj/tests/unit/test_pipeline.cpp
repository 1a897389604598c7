#include <doctest.h>

#include <filesystem>
#include <string>

#include "cited/error.hpp"
#include "cited/io.hpp"
#include "cited/pipeline.hpp"

using namespace cited;

namespace {

std::string config_error(std::string_view text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigInvalid);
    return e.what();
  }
  FAIL("config accepted: " << text);
  return {};
}

ExperimentConfig tiny(const fs::path& out) {
  ExperimentConfig cfg;
  cfg.sbm.nodes_per_block = 30;
  cfg.sbm.train_per_class = 10;
  cfg.sbm.val_per_class = 5;
  cfg.model.restarts = 1;
  cfg.model.train.epochs = 40;
  cfg.model.finetune_epochs = 5;
  cfg.attack.surrogates = 2;
  cfg.attack.independents = 2;
  cfg.attack.query_total = 30;
  cfg.bounds.trials = 10;
  cfg.output_dir = out;
  cfg.workers = 1;
  return cfg;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("config defaults and overrides") {
    const ExperimentConfig d = parse_config("{}");
    CHECK(d.master_seed == 42);
    CHECK(d.model.hidden == 16);
    CHECK(d.attack.levels.size() == 2);
    CHECK_FALSE(d.bounds.eta.has_value());

    const ExperimentConfig c = parse_config(R"({
      "master_seed": 7,
      "dataset": {"sbm": {"blocks": 4, "feat_dim": 8}},
      "model": {"hidden": 8, "train": {"lr": 0.01}},
      "signature": {"margin_variant": "literal", "lambda": 0.5},
      "attack": {"levels": ["label"], "removal": "finetune", "query": {"total": 40}},
      "verify": {"use_sinkhorn": true},
      "bounds": {"eta": 0.1, "trials": 5}
    })");
    CHECK(c.master_seed == 7);
    CHECK(c.sbm.blocks == 4);
    CHECK(c.sbm.feat_dim == 8);
    CHECK(c.model.hidden == 8);
    CHECK(c.model.train.lr == 0.01);
    CHECK(c.signature.margin_variant == MarginVariant::literal);
    CHECK(c.attack.levels == std::vector<OutputLevel>{OutputLevel::label});
    CHECK(c.attack.removal == RemovalKind::finetune);
    CHECK(c.attack.query_total == 40);
    CHECK(c.verify.use_sinkhorn);
    CHECK(c.bounds.eta == 0.1);
    CHECK(c.bounds.trials == 5);
  }

  TEST_CASE("config errors name the field") {
    CHECK(config_error(R"({"model": {"hidden": "wide"}})").find("model.hidden") != std::string::npos);
    CHECK(config_error(R"({"model": {"hiden": 4}})").find("model.hiden") != std::string::npos);
    CHECK(config_error(R"({"attack": {"removal": "melt"}})").find("attack.removal") !=
          std::string::npos);
    CHECK(config_error(R"({"model": {"train": {"dropout": 1.5}}})").find("model.train") !=
          std::string::npos);
    CHECK(config_error(R"({"bounds": {"trials": -1}})").find("bounds.trials") != std::string::npos);
    CHECK(config_error(R"({"dataset": {"sbm": {"p_in": 1.5}}})").find("dataset.sbm") !=
          std::string::npos);
    CHECK(config_error("[1, 2]").size() > 0);
    CHECK_THROWS_AS(parse_config("{not json"), Error);
  }

  TEST_CASE("missing files") {
    try {
      load_config("/nonexistent/cited.json");
      FAIL("expected MissingArtifact");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MissingArtifact);
    }
    const ExperimentConfig c = parse_config(R"({"dataset": {"path": "nowhere.json"}})", "/tmp");
    REQUIRE(c.dataset_path.has_value());
    CHECK(*c.dataset_path == fs::path("/tmp/nowhere.json"));
    try {
      make_dataset(c);
      FAIL("expected MissingArtifact");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MissingArtifact);
    }
    ExperimentConfig empty = tiny(fs::temp_directory_path() / "cited_cli_empty");
    fs::remove_all(empty.output_dir);
    try {
      cmd_verify(empty);
      FAIL("expected MissingArtifact");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MissingArtifact);
    }
  }

  TEST_CASE("stage seeds") {
    ExperimentConfig a;
    ExperimentConfig b;
    b.master_seed = 43;
    CHECK(stage_seed(a, "pool") != stage_seed(a, "dataset"));
    CHECK(stage_seed(a, "pool") != stage_seed(b, "pool"));
    CHECK(stage_seed(a, "pool") == stage_seed(a, "pool"));
  }

  TEST_CASE("pipeline reruns are byte identical") {
    const fs::path root = fs::temp_directory_path() / "cited_cli_rerun";
    fs::remove_all(root);
    const ExperimentConfig one = tiny(root / "one");
    const ExperimentConfig two = tiny(root / "two");
    cmd_pipeline(one);
    cmd_pipeline(two);
    for (const char* f : {"summary.csv", "report_emb.csv", "report_label.csv",
                          "curve_emb.csv", "curve_label.csv", "train_summary.csv",
                          "bounds_trials.csv", "bounds_tail.csv", "signature.json", "target.json"}) {
      INFO(f);
      CHECK(read_text(root / "one" / f) == read_text(root / "two" / f));
    }
    const std::string summary = read_text(root / "one" / "summary.csv");
    CHECK(summary.rfind("level,aruc,auc", 0) == 0);
    CHECK(summary.find("\nemb,") != std::string::npos);
    CHECK(summary.find("\nlabel,") != std::string::npos);
    CHECK(fs::exists(root / "one" / "manifest.json"));
    CHECK(fs::exists(root / "one" / "pool_manifest.json"));
    fs::remove_all(root);
  }
}
