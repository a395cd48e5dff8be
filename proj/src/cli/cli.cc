#include "gesa/cli/cli.h"

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/match.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "gesa/core/dataset_io.h"
#include "gesa/core/status_macros.h"
#include "gesa/datagen/datagen.h"
#include "gesa/engine/pipeline.h"
#include "gesa/explain/explain.h"
#include "gesa/hetgraph/gnn.h"
#include "gesa/optimizer/nsga2.h"
#include "gesa/recsys/ivfpq.h"
#include "gesa/server/server.h"
#include "nlohmann/json.hpp"

namespace gesa::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

absl::StatusOr<json> ReadJson(const std::string& path) {
  ASSIGN_OR_RETURN(std::string text, ReadFileToString(path));
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) {
    return absl::InvalidArgumentError(absl::StrCat(path, ": malformed JSON"));
  }
  return doc;
}

absl::Status WriteJson(const json& doc, const std::string& path) {
  return WriteStringToFile(doc.dump(2) + "\n", path);
}


// Whitespace- or comma-separated numbers, or a JSON array.
absl::StatusOr<Eigen::VectorXd> ReadVector(const std::string& path) {
  ASSIGN_OR_RETURN(std::string text, ReadFileToString(path));
  std::vector<double> values;
  const size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_array()) {
      return absl::InvalidArgumentError(absl::StrCat(path, ": malformed vector"));
    }
    for (const json& v : doc) {
      if (!v.is_number()) {
        return absl::InvalidArgumentError(absl::StrCat(path, ": non-numeric entry"));
      }
      values.push_back(v.get<double>());
    }
  } else {
    for (absl::string_view token :
         absl::StrSplit(text, absl::ByAnyChar(" \t\r\n,"), absl::SkipEmpty())) {
      double v;
      if (!absl::SimpleAtod(token, &v)) {
        return absl::InvalidArgumentError(
            absl::StrCat(path, ": not a number: ", std::string(token)));
      }
      values.push_back(v);
    }
  }
  if (values.empty()) {
    return absl::InvalidArgumentError(absl::StrCat(path, ": empty vector"));
  }
  return Eigen::Map<Eigen::VectorXd>(values.data(),
                                     static_cast<Eigen::Index>(values.size()));
}

absl::StatusOr<engine::AllocateConfig> ConfigOrSeed(
    const std::string& config_path, const std::optional<uint64_t>& seed) {
  engine::AllocateConfig config;
  if (!config_path.empty()) {
    ASSIGN_OR_RETURN(config, engine::ReadAllocateConfig(config_path));
  }
  if (seed) config.optimizer.seed = *seed;
  return config;
}

absl::StatusOr<std::unique_ptr<engine::Workspace>> LoadWorkspace(
    const std::string& data_path, const engine::AllocateConfig& config) {
  ASSIGN_OR_RETURN(Dataset dataset, ReadDataset(data_path));
  return engine::Prepare(dataset, config);
}

absl::StatusOr<int> Lookup(int index, const std::string& kind,
                           const std::string& id) {
  if (index < 0) return absl::NotFoundError(absl::StrCat("unknown ", kind, " ", id));
  return index;
}

absl::StatusOr<AllocationPlan> ReadPlan(const std::string& path) {
  ASSIGN_OR_RETURN(json doc, ReadJson(path));
  return PlanFromJson(doc);
}

struct GenerateArgs {
  std::string spec, out;
  std::optional<uint64_t> seed;
};

absl::Status Generate(const GenerateArgs& a, std::ostream& out) {
  ASSIGN_OR_RETURN(json doc, ReadJson(a.spec));
  if (!a.seed && !(doc.is_object() && doc.contains("seed"))) {
    return absl::InvalidArgumentError(
        "the spec has no \"seed\"; add one or pass --seed");
  }
  ASSIGN_OR_RETURN(datagen::GenSpec spec, datagen::GenSpecFromJson(doc));
  if (a.seed) spec.seed = *a.seed;
  ASSIGN_OR_RETURN(Dataset dataset, datagen::GenerateDataset(spec));
  RETURN_IF_ERROR(WriteDataset(dataset, a.out));
  out << json{{"candidates", dataset.candidates.size()},
              {"roles", dataset.roles.size()},
              {"interactions", dataset.interactions.size()},
              {"out", a.out}}
             .dump()
      << "\n";
  return absl::OkStatus();
}

struct TrainGraphArgs {
  std::string data, out, loss;
  uint64_t seed = 0;
  engine::GraphTrainingConfig config;
};

absl::Status TrainGraph(TrainGraphArgs a, std::ostream& out) {
  ASSIGN_OR_RETURN(Dataset dataset, ReadDataset(a.data));
  a.config.training.seed = a.seed;
  ASSIGN_OR_RETURN(engine::GraphTrainingResult r,
                   engine::TrainGraph(dataset, a.config));
  RETURN_IF_ERROR(r.embeddings.Save(a.out));
  const std::string loss_path = a.loss.empty() ? a.out + ".loss.csv" : a.loss;
  RETURN_IF_ERROR(
      WriteStringToFile(hetgraph::LossHistoryCsv(r.loss_history), loss_path));
  out << json{{"nodes", r.embeddings.size()},
              {"dimension", r.embeddings.dimension()},
              {"epochs", r.loss_history.size()},
              {"final_loss", r.loss_history.empty() ? 0.0 : r.loss_history.back()},
              {"loss_csv", loss_path}}
             .dump()
      << "\n";
  return absl::OkStatus();
}

struct DebiasArgs {
  std::string data, embeddings, out, history;
  uint64_t seed = 0;
  engine::DebiasRunConfig config;
};

absl::Status Debias(DebiasArgs a, std::ostream& out) {
  ASSIGN_OR_RETURN(Dataset dataset, ReadDataset(a.data));
  ASSIGN_OR_RETURN(embed::PrecomputedEmbeddings inputs,
                   embed::PrecomputedEmbeddings::Load(a.embeddings));
  a.config.training.seed = a.seed;
  ASSIGN_OR_RETURN(engine::DebiasRunResult r,
                   engine::RunDebias(dataset, inputs, a.config));
  RETURN_IF_ERROR(r.representations.Save(a.out));
  if (!a.history.empty()) {
    std::string csv = "epoch,total,allocation,adversarial,reconstruction\n";
    for (size_t e = 0; e < r.history.size(); ++e) {
      const debias::LossBreakdown& l = r.history[e];
      absl::StrAppend(&csv, e, ",", l.total, ",", l.allocation, ",",
                      l.adversarial, ",", l.reconstruction, "\n");
    }
    RETURN_IF_ERROR(WriteStringToFile(csv, a.history));
  }
  json summary = {{"lambda", a.config.training.lambda},
                  {"leakage", r.leakage},
                  {"vectors", r.representations.size()}};
  if (!r.history.empty()) {
    const debias::LossBreakdown& l = r.history.back();
    summary["final_loss"] = {{"total", l.total},
                             {"allocation", l.allocation},
                             {"adversarial", l.adversarial},
                             {"reconstruction", l.reconstruction}};
  }
  out << summary.dump() << "\n";
  return absl::OkStatus();
}

struct AllocateArgs {
  std::string data, config, out;
};

absl::Status Allocate(const AllocateArgs& a, std::ostream& out) {
  ASSIGN_OR_RETURN(engine::AllocateConfig config,
                   engine::ReadAllocateConfig(a.config));
  ASSIGN_OR_RETURN(std::unique_ptr<engine::Workspace> ws,
                   LoadWorkspace(a.data, config));
  ASSIGN_OR_RETURN(engine::AllocationResult r, engine::Allocate(*ws));
  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) {
    return absl::InvalidArgumentError(
        absl::StrCat("cannot create ", a.out, ": ", ec.message()));
  }
  const fs::path dir(a.out);
  RETURN_IF_ERROR(WriteJson(engine::FrontToJson(*ws, r.front),
                            (dir / "front.json").string()));
  RETURN_IF_ERROR(WriteJson(PlanToJson(r.plan), (dir / "plan.json").string()));
  RETURN_IF_ERROR(WriteStringToFile(optimizer::TraceCsv(r.front.trace),
                                    (dir / "trace.csv").string()));
  out << json{{"front_size", r.front.members.size()},
              {"generations", r.front.trace.size()},
              {"objectives",
               {{"merit", r.plan.objective_values.merit},
                {"diversity", r.plan.objective_values.diversity},
                {"preference", r.plan.objective_values.preference}}},
              {"infeasible", r.plan.infeasible},
              {"out", a.out}}
             .dump()
      << "\n";
  return absl::OkStatus();
}

struct ExplainArgs {
  std::string data, plan, config, candidate, role, out;
  std::optional<uint64_t> seed;
  std::vector<std::string> alternates;
  int top_k = 5;
};

absl::Status Explain(const ExplainArgs& a, std::ostream& out) {
  ASSIGN_OR_RETURN(engine::AllocateConfig config, ConfigOrSeed(a.config, a.seed));
  ASSIGN_OR_RETURN(std::unique_ptr<engine::Workspace> ws,
                   LoadWorkspace(a.data, config));
  ASSIGN_OR_RETURN(AllocationPlan plan, ReadPlan(a.plan));
  ASSIGN_OR_RETURN(explain::ExplainContext ctx,
                   engine::MakeExplainContext(*ws, plan));
  ASSIGN_OR_RETURN(int c, Lookup(ws->objectives.CandidateIndex(a.candidate),
                                 "candidate", a.candidate));
  ASSIGN_OR_RETURN(int r, Lookup(ws->objectives.RoleIndex(a.role), "role", a.role));
  std::vector<int> alternates;
  for (const std::string& id : a.alternates) {
    ASSIGN_OR_RETURN(int alt,
                     Lookup(ws->objectives.CandidateIndex(id), "candidate", id));
    alternates.push_back(alt);
  }
  ASSIGN_OR_RETURN(explain::ExplanationBundle bundle,
                   explain::ExplainAllocation(ctx, c, r, alternates, a.top_k));
  const json doc = explain::BundleToJson(bundle);
  if (a.out.empty()) {
    out << doc.dump(2) << "\n";
    return absl::OkStatus();
  }
  return WriteJson(doc, a.out);
}

struct IndexArgs {
  std::string embeddings, out, prefix;
  uint64_t seed = 0;
  recsys::IvfPqConfig config;
};

absl::Status Index(IndexArgs a, std::ostream& out) {
  ASSIGN_OR_RETURN(embed::PrecomputedEmbeddings emb,
                   embed::PrecomputedEmbeddings::Load(a.embeddings));
  recsys::VectorSet set;
  for (const auto& [id, v] : emb.vectors()) {
    if (absl::StartsWith(id, a.prefix)) set.ids.push_back(id);
  }
  if (set.ids.empty()) {
    return absl::InvalidArgumentError("no vectors to index");
  }
  set.data.resize(static_cast<Eigen::Index>(set.ids.size()), emb.dimension());
  for (size_t i = 0; i < set.ids.size(); ++i) {
    set.data.row(static_cast<Eigen::Index>(i)) =
        emb.vectors().at(set.ids[i]).transpose();
  }
  a.config.seed = a.seed;
  ASSIGN_OR_RETURN(recsys::IvfPqIndex index, recsys::IvfPqIndex::Build(set, a.config));
  RETURN_IF_ERROR(index.Save(a.out));
  out << json{{"size", index.size()},
              {"dimension", index.dimension()},
              {"nlist", index.nlist()},
              {"m", index.m()},
              {"out", a.out}}
             .dump()
      << "\n";
  return absl::OkStatus();
}

struct QueryArgs {
  std::string index, vector;
  int k = 10;
  int nprobe = 1;
  bool rerank = false;
};

absl::Status Query(const QueryArgs& a, std::ostream& out) {
  ASSIGN_OR_RETURN(recsys::IvfPqIndex index, recsys::IvfPqIndex::Load(a.index));
  ASSIGN_OR_RETURN(Eigen::VectorXd q, ReadVector(a.vector));
  ASSIGN_OR_RETURN(recsys::QueryResult r, index.Query(q, a.k, a.nprobe, a.rerank));
  json neighbors = json::array();
  for (const recsys::Neighbor& n : r.neighbors) {
    neighbors.push_back({{"id", n.id}, {"distance", n.distance}});
  }
  out << json{{"neighbors", neighbors}, {"truncated", r.truncated}}.dump(2)
      << "\n";
  return absl::OkStatus();
}

struct EvalArgs {
  std::string data, plan, config, out;
  std::optional<uint64_t> seed;
  int k = 3;
};

absl::Status Eval(const EvalArgs& a, std::ostream& out) {
  ASSIGN_OR_RETURN(engine::AllocateConfig config, ConfigOrSeed(a.config, a.seed));
  ASSIGN_OR_RETURN(std::unique_ptr<engine::Workspace> ws,
                   LoadWorkspace(a.data, config));
  ASSIGN_OR_RETURN(AllocationPlan plan, ReadPlan(a.plan));
  ASSIGN_OR_RETURN(json report, engine::EvaluateReport(*ws, plan, a.k));
  if (a.out.empty()) {
    out << report.dump(2) << "\n";
    return absl::OkStatus();
  }
  return WriteJson(report, a.out);
}

struct ServeArgs {
  std::string data_dir, host = "0.0.0.0";
  std::optional<int> port;
};

absl::Status Serve(const ServeArgs& a, std::ostream& err) {
  ASSIGN_OR_RETURN(server::ServerOptions options, server::OptionsFromEnvironment());
  if (!a.data_dir.empty()) options.data_dir = a.data_dir;
  if (a.port) options.port = *a.port;
  options.host = a.host;
  err << "serving " << options.data_dir << " on " << options.host << ":"
      << options.port << "\n";
  return server::Serve(options);
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Allocation engine command line", "gesa"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Generate a synthetic dataset");
  generate->add_option("--spec", gen.spec, "Generator spec (JSON)")->required();
  generate->add_option("--out", gen.out, "Output dataset")->required();
  generate->add_option("--seed", gen.seed, "Overrides the spec's seed");

  TrainGraphArgs tg;
  auto* train = app.add_subcommand("train-graph", "Train graph embeddings");
  train->add_option("--data", tg.data, "Dataset")->required();
  train->add_option("--out", tg.out, "Output embeddings")->required();
  train->add_option("--seed", tg.seed, "Random seed")->required();
  train->add_option("--epochs", tg.config.training.epochs, "Training epochs")
      ->capture_default_str();
  train->add_option("--layers", tg.config.training.layers)->capture_default_str();
  train->add_option("--hidden", tg.config.training.hidden_dim)->capture_default_str();
  train->add_option("--lr", tg.config.training.learning_rate)->capture_default_str();
  train->add_option("--dim", tg.config.embedding_dim, "Text embedding dimension")
      ->capture_default_str();
  train->add_option("--loss", tg.loss, "Loss CSV (default <out>.loss.csv)");

  DebiasArgs db;
  auto* debias = app.add_subcommand("debias", "Train debiased representations");
  debias->add_option("--data", db.data, "Dataset")->required();
  debias->add_option("--embeddings", db.embeddings, "Input embeddings")->required();
  debias->add_option("--lambda", db.config.training.lambda, "Adversarial weight")
      ->required();
  debias->add_option("--out", db.out, "Output representations")->required();
  debias->add_option("--seed", db.seed, "Random seed")->required();
  debias->add_option("--category", db.config.category, "Sensitive category");
  debias->add_option("--beta", db.config.training.beta)->capture_default_str();
  debias->add_option("--epochs", db.config.training.epochs)->capture_default_str();
  debias->add_option("--dim", db.config.training.representation_dim)
      ->capture_default_str();
  debias->add_option("--history", db.history, "Loss history CSV");

  AllocateArgs al;
  auto* allocate = app.add_subcommand(
      "allocate", "Run the optimizer; writes front.json, plan.json, trace.csv");
  allocate->add_option("--data", al.data, "Dataset")->required();
  allocate->add_option("--config", al.config, "Allocation config (JSON)")->required();
  allocate->add_option("--out", al.out, "Output directory")->required();

  ExplainArgs ex;
  auto* explain = app.add_subcommand("explain", "Explain one assignment");
  explain->add_option("--data", ex.data, "Dataset")->required();
  explain->add_option("--plan", ex.plan, "Plan (JSON)")->required();
  explain->add_option("--candidate", ex.candidate, "Candidate id")->required();
  explain->add_option("--role", ex.role, "Role id")->required();
  auto* explain_config = explain->add_option("--config", ex.config, "Allocation config");
  auto* explain_seed = explain->add_option("--seed", ex.seed, "Sampling seed");
  explain->add_option("--alternates", ex.alternates, "Candidate ids to compare")
      ->delimiter(',');
  explain->add_option("--top-k", ex.top_k)->capture_default_str();
  explain->add_option("--out", ex.out, "Write to a file instead of stdout");

  IndexArgs ix;
  auto* index = app.add_subcommand("index", "Build an IVF-PQ index");
  index->add_option("--embeddings", ix.embeddings, "Embeddings")->required();
  index->add_option("--out", ix.out, "Output index")->required();
  index->add_option("--seed", ix.seed, "k-means seed")->required();
  index->add_option("--nlist", ix.config.nlist, "Lists (0: sqrt(count))")
      ->capture_default_str();
  index->add_option("--m", ix.config.m, "Sub-quantizers")->capture_default_str();
  index->add_option("--iters", ix.config.kmeans_iters)->capture_default_str();
  index->add_option("--prefix", ix.prefix, "Only ids with this prefix");

  QueryArgs qa;
  auto* query = app.add_subcommand("query", "Query an IVF-PQ index");
  query->add_option("--index", qa.index, "Index")->required();
  query->add_option("--vector", qa.vector, "Query vector file")->required();
  query->add_option("-k", qa.k, "Neighbors")->capture_default_str();
  query->add_option("--nprobe", qa.nprobe, "Lists to scan")->capture_default_str();
  query->add_flag("--rerank", qa.rerank, "Re-score candidates exactly");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Evaluate a plan");
  eval->add_option("--data", ev.data, "Dataset")->required();
  eval->add_option("--plan", ev.plan, "Plan (JSON)")->required();
  auto* eval_config = eval->add_option("--config", ev.config, "Allocation config");
  auto* eval_seed = eval->add_option("--seed", ev.seed, "Seed");
  eval->add_option("-k", ev.k, "Top-k cutoff")->capture_default_str();
  eval->add_option("--out", ev.out, "Write to a file instead of stdout");

  ServeArgs sv;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--data-dir", sv.data_dir, "Persistence root (GESA_DATA_DIR)");
  serve->add_option("--port", sv.port, "Listen port (GESA_PORT, default 8080)");
  serve->add_option("--host", sv.host)->capture_default_str();

  try {
    app.parse(argc, argv);
    if (explain->parsed() && explain_config->count() == 0 &&
        explain_seed->count() == 0) {
      throw CLI::RequiredError("explain needs --config or --seed");
    }
    if (eval->parsed() && eval_config->count() == 0 && eval_seed->count() == 0) {
      throw CLI::RequiredError("eval needs --config or --seed");
    }
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* sub = nullptr;
    for (const CLI::App* s : app.get_subcommands()) sub = s;
    err << (sub != nullptr ? sub->help() : app.help());
    return kExitUsage;
  }

  absl::Status status;
  if (generate->parsed()) status = Generate(gen, out);
  if (train->parsed()) status = TrainGraph(tg, out);
  if (debias->parsed()) status = Debias(db, out);
  if (allocate->parsed()) status = Allocate(al, out);
  if (explain->parsed()) status = Explain(ex, out);
  if (index->parsed()) status = Index(ix, out);
  if (query->parsed()) status = Query(qa, out);
  if (eval->parsed()) status = Eval(ev, out);
  if (serve->parsed()) status = Serve(sv, err);
  if (!status.ok()) {
    err << "error: " << status.message() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace gesa::cli
