#include "propgraph/cli.hpp"

#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "propgraph/config.hpp"
#include "propgraph/error.hpp"
#include "propgraph/eval.hpp"
#include "propgraph/graph_io.hpp"
#include "propgraph/indexing.hpp"
#include "propgraph/usage.hpp"

namespace propgraph {

namespace {

void print_counts(std::ostream& out, const GraphCounts& c) {
  out << "passages " << c.passages << "\n"
      << "propositions " << c.propositions << "\n"
      << "entities " << c.entities << "\n"
      << "edges " << c.edges << "\n";
}

std::ofstream open_out(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + p.string());
  return f;
}

QueryMode mode_from(const std::string& name) {
  const auto m = parse_query_mode(name);
  if (!m) throw CLI::ValidationError("--mode", "expected naive, local or global");
  return *m;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Proposition graph retrieval and question answering", "propgraph"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

  std::string config_path, corpus_path, graph_dir, out_path, dataset_path, report_path, log_path;
  std::string trace_path = "trace.jsonl";
  std::string mode_name = "local";
  std::string question;
  std::optional<std::size_t> max_iter, workers;

  auto* index = app.add_subcommand("index", "Build a graph from a corpus");
  index->add_option("--config", config_path, "Run configuration (JSON)")->required();
  index->add_option("--corpus", corpus_path, "Directory of .txt files or JSONL file")->required();
  index->add_option("--out", out_path, "Output graph directory")->required();

  auto* stats = app.add_subcommand("stats", "Print node and edge counts of a graph");
  stats->add_option("--graph", graph_dir, "Graph directory")->required();

  auto* query = app.add_subcommand("query", "Answer one question");
  query->add_option("--config", config_path, "Run configuration (JSON)")->required();
  query->add_option("--graph", graph_dir, "Graph directory")->required();
  query->add_option("--mode", mode_name, "naive, local or global")->check(CLI::IsMember({"naive", "local", "global"}));
  query->add_option("--max-iter", max_iter, "Override max_iter (local) / global_max_iter (global)");
  query->add_option("--trace", trace_path, "Trace output (JSONL)");
  query->add_option("question", question, "Question text")->required();

  auto* eval = app.add_subcommand("eval", "Answer a QA dataset and score EM / F1");
  eval->add_option("--config", config_path, "Run configuration (JSON)")->required();
  eval->add_option("--graph", graph_dir, "Graph directory")->required();
  eval->add_option("--dataset", dataset_path, "JSONL with question / answers")->required();
  eval->add_option("--mode", mode_name, "naive, local or global")->check(CLI::IsMember({"naive", "local", "global"}));
  eval->add_option("--report", report_path, "Metrics report output (JSON)")->required();
  eval->add_option("--log", log_path, "Per-question log output (JSONL)");
  eval->add_option("--workers", workers, "Concurrent questions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }
  spdlog::set_level(verbose ? spdlog::level::info : spdlog::level::warn);

  try {
    if (*stats) {
      print_counts(out, graph_stats(load_graph(graph_dir)));
      return 0;
    }

    auto cfg = RunConfig::load(config_path);
    if (workers) cfg.workers = *workers;
    if (max_iter) {
      cfg.max_iter = *max_iter;
      cfg.global_max_iter = *max_iter;
    }
    cfg.validate();

    UsageLedger ledger;
    auto chat = make_chat_backend(cfg);
    MeteredChat metered(*chat, ledger);
    auto embed = make_embed_backend(cfg);
    const LlmGateway gateway(metered, cfg.gateway());

    if (*index) {
      const auto docs = load_corpus(corpus_path);
      const auto graph = index_corpus(docs, gateway, *embed, cfg.indexing());
      save_graph(graph, out_path);
      print_counts(out, graph.counts());
      return 0;
    }

    const auto graph = load_graph(graph_dir);
    const GraphIndex gindex(graph);
    const QueryContext ctx{gindex, gateway, *embed};
    const auto mode = mode_from(mode_name);

    if (*query) {
      const auto outcome = run_query(question, mode, ctx, cfg);
      auto trace = open_out(trace_path);
      for (const auto& e : outcome.events) trace << e.dump() << '\n';
      out << "answer: " << outcome.answer << "\n"
          << "trace: " << trace_path << "\n";
      return 0;
    }

    if (*eval) {
      const auto records = load_dataset(dataset_path);
      std::optional<std::ofstream> log;
      if (!log_path.empty()) log = open_out(log_path);
      const auto report = run_eval(records, mode, ctx, cfg, ledger, log ? &*log : nullptr);
      const auto text = report.to_json().dump(2);
      auto f = open_out(report_path);
      f << text << '\n';
      out << text << '\n';
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace propgraph
