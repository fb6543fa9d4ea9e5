#include "newsgraph/app.hpp"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "newsgraph/data/pipeline.hpp"
#include "newsgraph/data/records.hpp"
#include "newsgraph/errors.hpp"
#include "newsgraph/seed.hpp"
#include "newsgraph/synthetic.hpp"
#include "newsgraph/train/metrics.hpp"
#include "newsgraph/train/trainer.hpp"

namespace newsgraph::app {

namespace fs = std::filesystem;

namespace {

std::string stem(model::ModelKind kind, labels::TargetMode mode) {
  return std::string(model::to_string(kind)) + "_" + std::string(labels::to_string(mode));
}

void write_text(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("cannot write '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void require_file(const fs::path& path, const std::string& what) {
  if (!fs::exists(path)) throw DataError(what + " '" + path.string() + "' does not exist");
}

std::string model_name(const RunConfig& config, model::ModelKind kind) {
  if (kind == model::ModelKind::Baseline) return "baseline";
  return "gnn-" + std::string(model::to_string(config.model.layer));
}

void setup_logging() {
  auto logger = spdlog::get("newsgraph");
  if (!logger) {
    logger = spdlog::stderr_logger_mt("newsgraph");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
  }
  const char* level = std::getenv("NEWSGRAPH_LOG_LEVEL");
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::info);
}

void ensure_output_dir(const RunConfig& config) {
  std::error_code ec;
  fs::create_directories(config.paths.output_dir, ec);
  if (ec) throw DataError("cannot create output dir '" + config.paths.output_dir.string() + "': " + ec.message());
}

}  // namespace

fs::path prepared_path(const RunConfig& config) { return config.paths.output_dir / "prepared.json"; }

fs::path checkpoint_path(const RunConfig& config, model::ModelKind kind, labels::TargetMode mode) {
  return config.paths.output_dir / (stem(kind, mode) + ".ckpt");
}

fs::path history_path(const RunConfig& config, model::ModelKind kind, labels::TargetMode mode) {
  return config.paths.output_dir / (stem(kind, mode) + "_history.tsv");
}

fs::path report_path(const RunConfig& config, model::ModelKind kind, labels::TargetMode mode, bool delimited) {
  return config.paths.output_dir / (stem(kind, mode) + (delimited ? "_report.tsv" : "_report.txt"));
}

model::Model make_model(const RunConfig& config, const data::PreparedDataset& dataset, model::ModelKind kind) {
  model::ModelConfig mc = config.model;
  mc.kind = kind;
  mc.article_dim = dataset.embedding_dim;
  std::vector<std::string> companies;
  std::set<std::string> industries;
  for (const auto& c : dataset.companies) {
    companies.push_back(c.symbol);
    if (!c.industry.empty()) industries.insert(c.industry);
  }
  std::vector<std::string> industry_keys;
  if (config.graph_config().industries) industry_keys.assign(industries.begin(), industries.end());
  return model::Model(mc, std::move(companies), std::move(industry_keys), derive_seed(config.seed, "init"));
}

void command_synth(const RunConfig& config, std::ostream& out) {
  const auto corpus = synthetic::generate(config.synth);
  synthetic::write_corpus(corpus, {config.paths.prices, config.paths.news, config.paths.embeddings,
                                   config.paths.screener});
  std::size_t mentions = 0;
  for (const auto& a : corpus.articles) mentions += a.mentioned_symbols.size();
  const std::size_t days = corpus.prices.empty() ? 0 : corpus.prices.front().bars.size();
  out << "companies\t" << corpus.screener.entries().size() << "\n"
      << "days\t" << days << "\n"
      << "articles\t" << corpus.articles.size() << "\n"
      << "mentions\t" << mentions << "\n"
      << "embedding_dim\t" << config.synth.embedding_dim << "\n";
}

void command_prepare(const RunConfig& config, std::ostream& out) {
  require_file(config.paths.prices, "prices file");
  require_file(config.paths.news, "news file");
  data::Screener screener = [&] {
    if (fs::exists(config.paths.screener)) return data::read_screener(config.paths.screener);
    spdlog::warn("screener '{}' not found; using every priced symbol as its own name", config.paths.screener.string());
    return data::Screener();
  }();
  const auto prices = data::read_prices(config.paths.prices);
  if (screener.empty()) {
    std::vector<data::ScreenerEntry> entries;
    for (const auto& s : prices) entries.push_back({s.symbol, s.symbol, ""});
    screener = data::Screener(std::move(entries));
  }
  auto articles = data::read_news(config.paths.news);
  std::vector<data::EmbeddingRecord> embeddings;
  if (!config.stub_embedder) {
    require_file(config.paths.embeddings, "embeddings file");
    embeddings = data::read_embeddings(config.paths.embeddings);
  }
  const auto dataset = data::prepare(screener, prices, std::move(articles),
                                     config.stub_embedder ? nullptr : &embeddings, config.prepare_options());
  const std::string leakage = data::leakage_report(dataset, config.graph_config());
  const std::string summary = data::prepare_summary(dataset);
  ensure_output_dir(config);
  data::save_prepared(prepared_path(config), dataset);
  write_text(config.paths.output_dir / "leakage.txt", leakage);
  write_text(config.paths.output_dir / "prepare_summary.txt", summary);
  out << summary << leakage;
}

void command_train(const RunConfig& config, model::ModelKind kind, std::ostream& out) {
  require_file(prepared_path(config), "prepared dataset");
  const auto dataset = data::load_prepared(prepared_path(config));
  const auto snapshots = train::build_snapshots(dataset, dataset.train_days, config.graph_config());
  ensure_output_dir(config);
  for (const auto mode : config.modes) {
    auto model = make_model(config, dataset, kind);
    const std::string name = stem(kind, mode);
    spdlog::info("training {} on {} snapshots for {} epochs", name, snapshots.size(), config.train.epochs);
    const auto history = train::train(model, snapshots, mode, config.train, [&](const train::EpochRecord& e) {
      spdlog::info("{} epoch {} loss {:.6f} train acc {} val acc {}", name, e.epoch, e.train_loss,
                   e.train_accuracy ? fmt::format("{:.4f}", *e.train_accuracy) : "n/a",
                   e.validation_accuracy ? fmt::format("{:.4f}", *e.validation_accuracy) : "n/a");
      return true;
    });
    model::save_checkpoint(checkpoint_path(config, kind, mode), model);
    write_text(history_path(config, kind, mode), train::render_history(history));
    out << name << "\tepochs " << history.epochs.size() << "\tcheckpoint " << checkpoint_path(config, kind, mode).string()
        << "\n";
  }
}

void command_eval(const RunConfig& config, model::ModelKind kind, std::ostream& out) {
  require_file(prepared_path(config), "prepared dataset");
  const auto dataset = data::load_prepared(prepared_path(config));
  if (dataset.test_days.empty()) throw DataError("eval: empty test split");
  const auto snapshots = train::build_snapshots(dataset, dataset.test_days, config.graph_config());
  for (const auto mode : config.modes) {
    auto model = make_model(config, dataset, kind);
    const auto ckpt = checkpoint_path(config, kind, mode);
    require_file(ckpt, "checkpoint");
    model::load_checkpoint(ckpt, model);
    const auto predictions = train::collect_predictions(model, snapshots, mode);
    const auto report =
        train::evaluate(predictions, mode, config.top_k, config.top_k_per_company, model_name(config, kind));
    const std::string text = train::render_text(report);
    write_text(report_path(config, kind, mode, false), text);
    write_text(report_path(config, kind, mode, true), train::render_delimited(report));
    out << text;
  }
}

void command_report(const RunConfig& config, model::ModelKind kind, bool per_company, bool delimited,
                    std::ostream& out) {
  for (const auto mode : config.modes) {
    const auto path = report_path(config, kind, mode, true);
    require_file(path, "report");
    const std::string text = read_text(path);
    if (delimited) {
      out << text;
      continue;
    }
    const auto report = train::parse_delimited(text);
    out << train::render_text(report, per_company);
    if (per_company) {
      const auto deciles = train::mention_deciles(report.companies);
      char buf[160];
      std::snprintf(buf, sizeof buf, "mention deciles (%zu companies each): bottom %.4f  top %.4f\n", deciles.size,
                    deciles.bottom, deciles.top);
      out << buf;
    }
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  setup_logging();
  CLI::App cli{"Stock movement prediction from news graphs"};
  cli.require_subcommand(1);
  cli.fallthrough();
  std::string config_file;
  std::vector<std::string> overrides;
  cli.add_option("-c,--config", config_file, "JSON run configuration");
  cli.add_option("--set", overrides, "Override a config key, e.g. --set train.epochs=10");

  auto* synth = cli.add_subcommand("synth", "Write a synthetic corpus to the configured paths");
  auto* prepare = cli.add_subcommand("prepare", "Ingest, label and split the corpus");
  auto* train_cmd = cli.add_subcommand("train", "Train the graph model for each configured target");
  auto* baseline_cmd = cli.add_subcommand("train-baseline", "Train the price-only baseline");
  auto* eval = cli.add_subcommand("eval", "Evaluate checkpoints on the test split");
  auto* report = cli.add_subcommand("report", "Render saved evaluation reports");

  std::string eval_model = "gnn", report_model = "gnn";
  std::optional<double> proportion;
  std::optional<std::size_t> samples;
  double p0 = 0.5;
  eval->add_option("--model", eval_model, "gnn or baseline")->check(CLI::IsMember({"gnn", "baseline"}));
  eval->add_option("--proportion", proportion, "Observed accuracy for a stand-alone z-test");
  eval->add_option("--samples", samples, "Sample count for the stand-alone z-test");
  eval->add_option("--p0", p0, "Null proportion for the stand-alone z-test");
  bool per_company = false, delimited = false;
  report->add_option("--model", report_model, "gnn or baseline")->check(CLI::IsMember({"gnn", "baseline"}));
  report->add_flag("--per-company", per_company, "Append the per-company mention and accuracy table");
  report->add_flag("--delimited", delimited, "Print the tab-delimited report");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    cli.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  const auto kind_of = [](const std::string& s) {
    return s == "baseline" ? model::ModelKind::Baseline : model::ModelKind::Gnn;
  };
  try {
    if (eval->parsed() && proportion) {
      if (!samples) throw ConfigError("--proportion needs --samples");
      const auto z = train::z_test(*proportion, p0, *samples);
      char buf[256];
      std::snprintf(buf, sizeof buf, "p_hat\t%.6f\np0\t%.6f\nn\t%zu\nse\t%.6f\nz\t%.4f\np_value\t%.6g\n", z.p_hat,
                    z.p0, z.n, z.se, z.z, z.p_value);
      out << buf;
      return 0;
    }
    const auto config =
        load_run_config(config_file.empty() ? std::nullopt : std::optional<fs::path>(config_file), overrides);
    if (synth->parsed()) command_synth(config, out);
    if (prepare->parsed()) command_prepare(config, out);
    if (train_cmd->parsed()) command_train(config, model::ModelKind::Gnn, out);
    if (baseline_cmd->parsed()) command_train(config, model::ModelKind::Baseline, out);
    if (eval->parsed()) command_eval(config, kind_of(eval_model), out);
    if (report->parsed()) command_report(config, kind_of(report_model), per_company, delimited, out);
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const ShapeError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace newsgraph::app
