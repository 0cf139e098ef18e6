#include "cli.hpp"

#include <atomic>
#include <csignal>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "http_server.hpp"
#include "pcr/corpus.hpp"
#include "pcr/encoder.hpp"
#include "pcr/evaluate.hpp"
#include "pcr/index.hpp"
#include "pcr/pipeline.hpp"
#include "pcr/sampling.hpp"
#include "pcr/service.hpp"
#include "pcr/synthetic.hpp"
#include "pcr/text.hpp"
#include "pcr/trainer.hpp"

namespace pcr::cli {
namespace {

namespace fs = std::filesystem;

struct SynthArgs {
  fs::path out_dir;
  SyntheticConfig config;
};

struct IngestArgs {
  fs::path articles;
  fs::path paragraphs;
  fs::path out_queries;
  fs::path out_pool;
};

struct SplitArgs {
  fs::path queries;
  fs::path out_dir;
  int pivot = kDefaultPivotYear;
};

struct SampleArgs {
  fs::path articles;
  fs::path paragraphs;
  fs::path queries;
  fs::path out;
  std::uint64_t seed = 0;
  std::size_t per_paragraph = 10;
  std::vector<std::size_t> quota{3, 3, 4};
};

struct TrainArgs {
  fs::path articles;
  fs::path train_queries;
  fs::path val_queries;
  fs::path quadruplets;
  fs::path out;
  fs::path log;
  fs::path init_checkpoint;
  EncoderConfig encoder;
  TrainConfig train;
  std::vector<std::uint64_t> seeds{0};
  std::string loss = "quadruplet";
  bool train_embeddings = false;
};

struct IndexArgs {
  fs::path checkpoint;
  fs::path articles;
  fs::path out;
  fs::path queries;
  fs::path run;
  std::string variant = "ts";
};

struct EvalArgs {
  fs::path run;
  fs::path gold;
  bool json = false;
};

struct AnalyzeArgs {
  fs::path run;
  fs::path gold;
  fs::path articles;
};

struct ServeArgs {
  std::string host = "0.0.0.0";
  int port = 8080;
  fs::path checkpoint;
  fs::path index;
  fs::path articles;
  fs::path queries;
  fs::path ui_dir;
};

std::vector<Article> read_articles(const fs::path& path) {
  auto load = load_articles(path);
  if (load.dropped_empty > 0) {
    spdlog::info("{}: {} article(s) dropped for an empty title or abstract", path.string(),
                 load.dropped_empty);
  }
  return std::move(load.articles);
}

// Path for the run with `seed` when several seeds share one --out.
fs::path per_seed(const fs::path& path, std::uint64_t seed, bool many) {
  if (!many || path.empty()) return path;
  auto out = path;
  out.replace_filename(path.stem().string() + ".seed" + std::to_string(seed) +
                       path.extension().string());
  return out;
}

int cmd_synth(const SynthArgs& args) {
  const auto corpus = generate_synthetic_corpus(args.config);
  write_articles(args.out_dir / "articles.jsonl", corpus.articles);
  write_paragraphs(args.out_dir / "paragraphs.jsonl", corpus.paragraphs);
  std::cout << "articles=" << corpus.articles.size() << "\n"
            << "paragraphs=" << corpus.paragraphs.size() << "\n";
  return 0;
}

int cmd_ingest(const IngestArgs& args) {
  auto load = load_articles(args.articles);
  const auto paragraphs = load_paragraphs(args.paragraphs);
  const auto eligible = eligible_paragraphs(paragraphs);
  const auto build = build_queries(paragraphs, load.articles);
  const auto pool = build_candidate_pool(load.articles);
  write_queries(args.out_queries, build.queries);
  if (!args.out_pool.empty()) write_articles(args.out_pool, pool.articles());

  std::size_t gold = 0;
  std::size_t reachable = 0;
  for (const auto& query : build.queries) {
    const auto candidates = filter_pool_for_query(pool, query);
    const IdSet in_pool(candidates.begin(), candidates.end());
    for (const auto& id : query.relevant_ids) {
      ++gold;
      reachable += in_pool.contains(id) ? 1 : 0;
    }
  }
  std::cout << "articles=" << load.articles.size() << "\n"
            << "dropped_empty=" << load.dropped_empty << "\n"
            << "pool_size=" << pool.size() << "\n"
            << "paragraphs=" << paragraphs.size() << "\n"
            << "eligible_paragraphs=" << eligible.size() << "\n"
            << "queries=" << build.queries.size() << "\n"
            << "skipped_unknown_citing=" << build.skipped_unknown_citing << "\n"
            << "gold_ids=" << gold << "\n"
            << "gold_in_year_filtered_pool=" << reachable << "\n";
  return 0;
}

int cmd_split(const SplitArgs& args) {
  const auto split = split_by_year(load_queries(args.queries), args.pivot);
  write_queries(args.out_dir / "train.jsonl", split.train);
  write_queries(args.out_dir / "validation.jsonl", split.validation);
  write_queries(args.out_dir / "test.jsonl", split.test);
  std::cout << "train=" << split.train.size() << "\n"
            << "validation=" << split.validation.size() << "\n"
            << "test=" << split.test.size() << "\n";
  return 0;
}

int cmd_sample(const SampleArgs& args) {
  if (args.quota.size() != 3) throw CLI::ValidationError("--quota", "needs three counts");
  Quota quota{{args.quota[0], args.quota[1], args.quota[2]}};
  if (quota.total() != args.per_paragraph) {
    throw CLI::ValidationError("--per-paragraph", "must equal the sum of --quota");
  }
  const auto articles = read_articles(args.articles);
  const auto all_paragraphs = load_paragraphs(args.paragraphs);

  std::vector<ParagraphRecord> selected;
  if (args.queries.empty()) {
    selected = eligible_paragraphs(all_paragraphs);
  } else {
    std::set<std::string> wanted;
    for (const auto& query : load_queries(args.queries)) wanted.insert(query.paragraph_id);
    for (const auto& paragraph : all_paragraphs) {
      if (wanted.contains(paragraph.id)) selected.push_back(paragraph);
    }
  }

  SamplingStats stats;
  const auto set = sample_corpus(selected, all_paragraphs, articles, args.seed, quota, &stats);
  write_quadruplets(args.out, set);
  std::array<std::size_t, 3> histogram{};
  for (const auto& quad : set.quadruplets) ++histogram[static_cast<std::size_t>(quad.neg_pool)];
  std::cout << "paragraphs=" << stats.paragraphs << "\n"
            << "skipped_single_positive=" << stats.skipped_single_positive << "\n"
            << "skipped_no_negatives=" << stats.skipped_no_negatives << "\n"
            << "short_of_quota=" << stats.short_of_quota << "\n"
            << "quadruplets=" << set.quadruplets.size() << "\n"
            << "P1=" << histogram[0] << "\nP2=" << histogram[1] << "\nP3=" << histogram[2] << "\n";
  return 0;
}

int cmd_train(TrainArgs args) {
  if (args.loss == "quadruplet") {
    args.train.loss = LossKind::kQuadruplet;
  } else if (args.loss == "triplet") {
    args.train.loss = LossKind::kTriplet;
  } else {
    throw CLI::ValidationError("--loss", "must be quadruplet or triplet");
  }
  const auto articles = read_articles(args.articles);
  const auto train_queries = load_queries(args.train_queries);
  const auto val_queries = load_queries(args.val_queries);
  const auto quadruplets = load_quadruplets(args.quadruplets);
  const auto corpus = TrainingCorpus::from(articles, train_queries, val_queries);
  spdlog::info("training on {} quadruplets (sampling seed {})", quadruplets.quadruplets.size(),
               quadruplets.seed);

  const bool many = args.seeds.size() > 1;
  std::vector<MetricReport> best_reports;
  for (const auto seed : args.seeds) {
    EncoderParams initial;
    if (!args.init_checkpoint.empty()) {
      initial = load_checkpoint(args.init_checkpoint);
    } else {
      auto encoder = args.encoder;
      encoder.seed = seed;
      initial = EncoderParams::initialize(encoder);
    }
    if (args.train_embeddings) initial.set_frozen(ParamId::kE, false);

    auto cfg = args.train;
    cfg.seed = seed;
    const auto result = train(corpus, quadruplets.quadruplets, initial, cfg);
    save_checkpoint(result.best, per_seed(args.out, seed, many));

    std::ostringstream log;
    for (const auto& entry : result.log) log << format_epoch_log(entry) << '\n';
    if (!args.log.empty()) {
      const auto path = per_seed(args.log, seed, many);
      if (path.has_parent_path()) fs::create_directories(path.parent_path());
      std::ofstream(path, std::ios::binary | std::ios::trunc) << log.str();
    }
    if (many) std::cout << "# seed " << seed << "\n";
    std::cout << log.str();
    if (result.log.empty()) {
      spdlog::warn("no epochs ran; wrote the initial checkpoint");
      continue;
    }
    const auto& best = result.log[static_cast<std::size_t>(result.best_epoch - 1)].validation;
    std::cout << "best_epoch=" << result.best_epoch << "\n" << format_report(best);
    best_reports.push_back(best);
  }

  if (many && !best_reports.empty()) {
    MetricReport mean;
    for (const auto& r : best_reports) {
      mean.r_precision += r.r_precision / static_cast<double>(best_reports.size());
      mean.r_at_5 += r.r_at_5 / static_cast<double>(best_reports.size());
      mean.r_at_10 += r.r_at_10 / static_cast<double>(best_reports.size());
      mean.mrr += r.mrr / static_cast<double>(best_reports.size());
    }
    mean.n_queries = best_reports.front().n_queries;
    mean.excluded_queries = best_reports.front().excluded_queries;
    mean.pool_coverage = best_reports.front().pool_coverage;
    std::cout << "# mean over " << best_reports.size() << " seeds\n" << format_report(mean);
  }
  return 0;
}

int cmd_index(const IndexArgs& args) {
  QueryVariant variant = QueryVariant::kWithTopicSentence;
  if (args.variant == "base") {
    variant = QueryVariant::kTitleAbstractOnly;
  } else if (args.variant != "ts") {
    throw CLI::ValidationError("--variant", "must be ts or base");
  }
  const auto params = load_checkpoint(args.checkpoint);
  const auto pool = build_candidate_pool(read_articles(args.articles));
  const auto index = VectorIndex::build(pool, params);
  index.save(args.out);
  std::cout << "pool_size=" << index.size() << "\ndim=" << index.dim() << "\n";
  if (!args.queries.empty()) {
    if (args.run.empty()) throw CLI::ValidationError("--run", "required with --queries");
    const auto run = rank_queries(index, params, load_queries(args.queries), variant);
    write_run(args.run, run);
    std::cout << "queries=" << run.size() << "\n";
  }
  return 0;
}

int cmd_eval(const EvalArgs& args) {
  const auto run = read_run(args.run, load_queries(args.gold));
  const auto report = evaluate_run(run);
  if (args.json) {
    std::cout << report_to_json(report).dump() << "\n";
  } else {
    std::cout << format_report(report);
  }
  return 0;
}

int cmd_analyze(const AnalyzeArgs& args) {
  const auto gold = load_queries(args.gold);
  const auto run = read_run(args.run, gold);
  const auto articles = read_articles(args.articles);
  std::unordered_map<ArticleId, int> years;
  std::unordered_map<ArticleId, std::string> texts;
  for (const auto& a : articles) {
    years.emplace(a.id, a.year);
    texts.emplace(a.id, compose_article_text(a.title, a.abstract));
  }
  std::unordered_map<std::string, std::string> query_texts;
  for (const auto& q : gold) query_texts.emplace(q.id(), q.text);

  const auto analysis = analyze_year_gap(run, years, query_texts, texts);
  std::cout << "pairs=" << analysis.pairs << "\n";
  auto print_r = [](const char* name, const std::optional<double>& r) {
    std::cout << name << "=";
    if (r) {
      std::cout << std::fixed << std::setprecision(4) << *r;
    } else {
      std::cout << "nan";
    }
    std::cout << "\n";
  };
  print_r("pearson_delta_t_rank", analysis.pearson_gap_rank);
  print_r("pearson_delta_t_jaccard", analysis.pearson_gap_jaccard);
  std::cout << "# year\tmean_rank\n";
  for (const auto& [year, rank] : analysis.mean_rank_by_year) {
    std::cout << year << "\t" << std::fixed << std::setprecision(2) << rank << "\n";
  }
  return 0;
}

std::atomic<httplib::Server*> g_server{nullptr};

int cmd_serve(const ServeArgs& args) {
  auto params = load_checkpoint(args.checkpoint);
  auto index = VectorIndex::load(args.index);
  auto articles = read_articles(args.articles);
  std::vector<Query> queries;
  if (!args.queries.empty()) queries = load_queries(args.queries);
  const RecommendService service(std::move(params), std::move(index), std::move(articles),
                                 std::move(queries));

  httplib::Server server;
  std::optional<fs::path> ui;
  if (!args.ui_dir.empty()) ui = args.ui_dir;
  mount_api(server, &service, ui);
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (auto* s = g_server.load()) s->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (auto* s = g_server.load()) s->stop();
  });
  spdlog::info("serving model {} ({} pool articles) on {}:{}", service.model_version(),
               service.pool_size(), args.host, args.port);
  const bool ok = server.listen(args.host, args.port);
  g_server = nullptr;
  if (!ok) {
    std::cerr << "pcr: cannot listen on " << args.host << ":" << args.port << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Paragraph-level citation recommendation toolkit", "pcr"};
  app.require_subcommand(1);
  app.fallthrough();
  bool verbose = false;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic clustered corpus");
  synth_cmd->add_option("--out-dir", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("--seed", synth.config.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--articles", synth.config.articles)->capture_default_str();
  synth_cmd->add_option("--clusters", synth.config.clusters)->capture_default_str();
  synth_cmd->add_option("--train", synth.config.train_paragraphs)->capture_default_str();
  synth_cmd->add_option("--validation", synth.config.validation_paragraphs)->capture_default_str();
  synth_cmd->add_option("--test", synth.config.test_paragraphs)->capture_default_str();
  synth_cmd->add_option("--pivot", synth.config.pivot_year)->capture_default_str();

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Load corpus files and build PCR queries");
  ingest_cmd->add_option("--articles", ingest.articles, "Article JSONL")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--paragraphs", ingest.paragraphs, "Paragraph JSONL")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--out-queries", ingest.out_queries, "Query JSONL to write")->required();
  ingest_cmd->add_option("--out-pool", ingest.out_pool, "Candidate pool JSONL to write");

  SplitArgs split;
  auto* split_cmd = app.add_subcommand("split", "Split queries into train/validation/test by year");
  split_cmd->add_option("--queries", split.queries)->required()->check(CLI::ExistingFile);
  split_cmd->add_option("--out-dir", split.out_dir)->required();
  split_cmd->add_option("--pivot", split.pivot, "Validation year")->capture_default_str();

  SampleArgs sample;
  auto* sample_cmd = app.add_subcommand("sample", "Sample training quadruplets");
  sample_cmd->add_option("--articles", sample.articles)->required()->check(CLI::ExistingFile);
  sample_cmd->add_option("--paragraphs", sample.paragraphs)->required()->check(CLI::ExistingFile);
  sample_cmd->add_option("--queries", sample.queries, "Restrict to these paragraphs (train split)")
      ->check(CLI::ExistingFile);
  sample_cmd->add_option("--out", sample.out, "Quadruplet JSONL to write")->required();
  sample_cmd->add_option("--seed", sample.seed)->capture_default_str();
  sample_cmd->add_option("--per-paragraph", sample.per_paragraph)->capture_default_str();
  sample_cmd->add_option("--quota", sample.quota, "Negatives per pool P1,P2,P3")
      ->delimiter(',')
      ->expected(3)
      ->capture_default_str();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Fine-tune the encoder on quadruplets");
  train_cmd->add_option("--articles", train_args.articles)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--train-queries", train_args.train_queries)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--val-queries", train_args.val_queries)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--quadruplets", train_args.quadruplets)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train_args.out, "Best checkpoint path")->required();
  train_cmd->add_option("--log", train_args.log, "Per-epoch TSV log path");
  train_cmd->add_option("--init-checkpoint", train_args.init_checkpoint)->check(CLI::ExistingFile);
  train_cmd->add_option("--hash-buckets", train_args.encoder.hash_buckets)->capture_default_str();
  train_cmd->add_option("--embed-dim", train_args.encoder.embed_dim)->capture_default_str();
  train_cmd->add_option("--hidden-dim", train_args.encoder.hidden_dim)->capture_default_str();
  train_cmd->add_option("--out-dim", train_args.encoder.out_dim)->capture_default_str();
  train_cmd->add_option("--epochs", train_args.train.epochs)->capture_default_str();
  train_cmd->add_option("--lr", train_args.train.lr)->capture_default_str();
  train_cmd->add_option("--beta1", train_args.train.beta1)->capture_default_str();
  train_cmd->add_option("--beta2", train_args.train.beta2)->capture_default_str();
  train_cmd->add_option("--weight-decay", train_args.train.weight_decay)->capture_default_str();
  train_cmd->add_option("--warmup", train_args.train.warmup_fraction)->capture_default_str();
  train_cmd->add_option("--batch-size", train_args.train.batch_size)->capture_default_str();
  train_cmd->add_option("--margin", train_args.train.margin)->capture_default_str();
  train_cmd->add_option("--seeds", train_args.seeds, "One training run per seed")
      ->delimiter(',')
      ->capture_default_str();
  train_cmd->add_option("--loss", train_args.loss, "quadruplet or triplet")->capture_default_str();
  train_cmd->add_flag("--train-embeddings", train_args.train_embeddings,
                      "Also update the token embedding table");

  IndexArgs index_args;
  auto* index_cmd = app.add_subcommand("index", "Embed the candidate pool (and optionally rank queries)");
  index_cmd->add_option("--checkpoint", index_args.checkpoint)->required()->check(CLI::ExistingFile);
  index_cmd->add_option("--articles", index_args.articles)->required()->check(CLI::ExistingFile);
  index_cmd->add_option("--out", index_args.out, "Index file to write")->required();
  index_cmd->add_option("--queries", index_args.queries, "Queries to rank")->check(CLI::ExistingFile);
  index_cmd->add_option("--run", index_args.run, "Run file to write");
  index_cmd->add_option("--variant", index_args.variant, "ts or base query text")->capture_default_str();

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score a run file against gold queries");
  eval_cmd->add_option("--run", eval.run)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--gold", eval.gold, "Query JSONL with relevant ids")->required()->check(CLI::ExistingFile);
  eval_cmd->add_flag("--json", eval.json, "Print the report as JSON");

  AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Rank-by-year and year-gap correlations");
  analyze_cmd->add_option("--run", analyze.run)->required()->check(CLI::ExistingFile);
  analyze_cmd->add_option("--gold", analyze.gold)->required()->check(CLI::ExistingFile);
  analyze_cmd->add_option("--articles", analyze.articles)->required()->check(CLI::ExistingFile);

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the recommendation HTTP service");
  serve_cmd->add_option("--host", serve.host)->capture_default_str();
  serve_cmd->add_option("--port", serve.port)->capture_default_str();
  serve_cmd->add_option("--checkpoint", serve.checkpoint)->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--index", serve.index)->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--articles", serve.articles)->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--queries", serve.queries, "Queries addressable by id in /explain")
      ->check(CLI::ExistingFile);
  serve_cmd->add_option("--ui-dir", serve.ui_dir, "Static files served under /ui")
      ->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "pcr: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  auto logger = spdlog::stderr_color_mt("pcr");
  spdlog::set_default_logger(logger);
  spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::warn : spdlog::level::info);

  try {
    if (synth_cmd->parsed()) return cmd_synth(synth);
    if (ingest_cmd->parsed()) return cmd_ingest(ingest);
    if (split_cmd->parsed()) return cmd_split(split);
    if (sample_cmd->parsed()) return cmd_sample(sample);
    if (train_cmd->parsed()) return cmd_train(train_args);
    if (index_cmd->parsed()) return cmd_index(index_args);
    if (eval_cmd->parsed()) return cmd_eval(eval);
    if (analyze_cmd->parsed()) return cmd_analyze(analyze);
    if (serve_cmd->parsed()) return cmd_serve(serve);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "pcr: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "pcr: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace pcr::cli
