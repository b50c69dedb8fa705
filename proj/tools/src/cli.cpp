#include "upsilon/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "upsilon/error.hpp"
#include "upsilon/project.hpp"
#include "upsilon/service.hpp"
#include "upsilon/simkit.hpp"

namespace upsilon {

namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  if (!fs::exists(path)) throw Error(ErrorCode::Io, "no such file " + path);
  return read_file(path);
}

std::pair<std::string, std::string> split_eq(const std::string& s, const char* what) {
  auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw CLI::ValidationError(what, "expected key=value, got '" + s + "'");
  }
  return {s.substr(0, eq), s.substr(eq + 1)};
}

std::string default_project() {
  const char* env = std::getenv("UPSILON_PROJECT");
  return env && *env ? env : ".";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hypothesis management over a U-relational store", "upsilon"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string project = default_project();
  bool json = false;
  app.add_option("--project", project, "Project directory (default $UPSILON_PROJECT or .)");
  app.add_flag("--json", json, "Print JSON instead of text");

  auto* init = app.add_subcommand("init", "Create an empty project");

  std::string file;
  auto* add_phen = app.add_subcommand("add-phenomenon", "Register a phenomenon (JSON or XML)");
  add_phen->add_option("file", file, "Phenomenon file, - for stdin")->required();

  std::vector<std::int64_t> targets;
  auto* add_hyp = app.add_subcommand("add-hypothesis", "Register a hypothesis from its MathML descriptor");
  add_hyp->add_option("descriptor", file, "Descriptor file, - for stdin")->required();
  add_hyp->add_option("--target", targets, "Phenomenon the hypothesis targets (repeatable)");

  std::int64_t phi = 0, upsilon = 0;
  auto* load = app.add_subcommand("load-trial", "Load a trial CSV");
  load->add_option("csv", file, "Trial CSV, - for stdin")->required();
  load->add_option("--phi", phi, "Phenomenon id")->required();
  load->add_option("--upsilon", upsilon, "Hypothesis id")->required();

  std::string out_file;
  auto* sim = app.add_subcommand("sim", "Simulate a model manifest and print the trial CSV");
  sim->add_option("model", file, "Model JSON")->required();
  sim->add_option("-o,--out", out_file, "Write the CSV here instead of stdout");

  auto* uintro = app.add_subcommand("u-intro", "Introduce uncertainty for a phenomenon");
  uintro->add_option("--phi", phi, "Phenomenon id")->required();

  std::string relation;
  std::vector<std::string> where;
  auto* query = app.add_subcommand("query", "Select rows of a relation");
  query->add_option("relation", relation, "Relation name, e.g. H_3^2 or Y_3^4")->required();
  query->add_option("--where", where, "attribute=value (repeatable)");

  std::string obs_file;
  std::optional<double> sigma;
  std::vector<double> at;
  std::vector<std::string> maps;
  bool dry_run = false;
  auto* cond = app.add_subcommand("condition", "Condition φ's worlds on observations and rank predictions");
  cond->add_option("--phi", phi, "Phenomenon id")->required();
  cond->add_option("--obs", obs_file, "Observation CSV")->required();
  cond->add_option("--sigma", sigma, "Observation standard deviation (default: sample sd, heuristic)");
  cond->add_option("--at", at, "Show rows at these index values only (repeatable)");
  cond->add_option("--map", maps, "symbol=Column, index first (e.g. --map t=Year --map x=Lynx)");
  cond->add_flag("--dry-run", dry_run, "Rank without writing posteriors back");

  auto* catalog = app.add_subcommand("catalog", "Print the catalog");
  auto* world = app.add_subcommand("world-table", "Print the world table");
  auto* preds = app.add_subcommand("predictions", "Print φ's predictions with confidences");
  preds->add_option("--phi", phi, "Phenomenon id")->required();

  int port = 8080;
  std::string host = "127.0.0.1";
  std::string static_dir;
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve->add_option("--port", port, "TCP port");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--static", static_dir, "Directory served below /ui");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    const fs::path root = project;
    if (*init) {
      Project::init(root);
      if (json) {
        out << nlohmann::json{{"root", fs::absolute(root).string()}}.dump(2) << "\n";
      } else {
        out << "initialized " << root.string() << "\n";
      }
      return kExitOk;
    }
    if (*sim) {
      auto model = sim::model_from_json(nlohmann::json::parse(slurp(file)));
      auto csv = format_trial_csv(sim::simulate(model));
      if (!out_file.empty()) {
        write_file_atomic(out_file, csv);
      } else if (json) {
        out << nlohmann::json{{"csv", csv}}.dump(2) << "\n";
      } else {
        out << csv;
      }
      return kExitOk;
    }
    if (*serve) {
      Service svc(root);
      err << fmt::format("serving {} on http://{}:{}\n", root.string(), host, port);
      return svc.listen(host, port, static_dir) ? kExitOk : kExitDomain;
    }

    if (!Project::initialized(root)) throw Error(ErrorCode::ProjectNotInitialized, root.string());
    const bool writes = *add_phen || *add_hyp || *load || *uintro || (*cond && !dry_run);
    ProjectLock lock(root, writes);
    Project p = Project::open(root);
    auto emit = [&](const nlohmann::json& j, const std::string& text) {
      if (json) {
        out << j.dump(2) << "\n";
      } else {
        out << text;
      }
    };

    if (*add_phen) {
      auto d = p.add_phenomenon(slurp(file));
      emit({{"phi", d.phenomenon_id}, {"description", d.description}},
           fmt::format("φ={} {}\n", d.phenomenon_id, d.description));
    } else if (*add_hyp) {
      auto a = p.add_hypothesis(slurp(file), targets);
      emit(a.to_json(), a.to_text());
    } else if (*load) {
      auto d = parse_trial_csv(slurp(file));
      d.phenomenon_id = phi;
      d.hypothesis_id = upsilon;
      auto tid = p.load_trial(d);
      emit({{"phi", phi}, {"upsilon", upsilon}, {"tid", tid}},
           fmt::format("loaded tid={} for (φ={}, υ={})\n", tid, phi, upsilon));
    } else if (*uintro) {
      auto warnings = p.u_intro(phi);
      const auto n = p.udb().worlds(phi)->size();
      std::string text = fmt::format("U-introduced φ={}: {} worlds\n", phi, n);
      for (const auto& w : warnings) text += "warning: " + w + "\n";
      emit({{"phi", phi}, {"worlds", n}, {"warnings", warnings}}, text);
    } else if (*query) {
      Predicate pred;
      for (const auto& w : where) pred.push_back(split_eq(w, "--where"));
      auto rs = p.query(relation, pred);
      auto j = to_json(rs);
      j["name"] = relation;
      emit(j, format_table(rs));
    } else if (*cond) {
      std::vector<std::pair<Symbol, std::string>> mapping;
      for (const auto& m : maps) mapping.push_back(split_eq(m, "--map"));
      auto obs = parse_observation_csv(slurp(obs_file), phi, mapping, sigma);
      auto report = p.condition(obs, at, dry_run);
      emit(report.to_json(), report.to_table());
    } else if (*catalog) {
      out << p.catalog_json().dump(2) << "\n";
    } else if (*world) {
      out << p.world_table_json().dump(2) << "\n";
    } else if (*preds) {
      out << p.predictions_json(phi).dump(2) << "\n";
    }
    return kExitOk;
  } catch (const CLI::ValidationError& e) {
    err << "usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.detail() << "\n";
    return kExitDomain;
  } catch (const nlohmann::json::exception& e) {
    err << "error: InvalidArgument: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: Io: " << e.what() << "\n";
    return kExitDomain;
  }
}

}  // namespace upsilon
