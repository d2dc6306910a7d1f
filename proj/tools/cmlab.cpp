// Copyright 2026 The cmchain Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// cmlab: run and report hierarchical-chain experiments.
//
// Exit codes: 0 all acceptance flags pass, 1 a statistical check failed,
// 2 usage or configuration error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cmchain/lab.hpp"

namespace {

namespace lab = cmchain::lab;

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;

  void apply(lab::ExperimentSpec& s) const {
    if (seed) s.seed = *seed;
    if (workers) s.workers = *workers;
    if (out) s.out = *out;
  }
};

void print_records(const lab::RunResult& res) {
  for (const auto& r : res.records) {
    std::cout << (r.value("pass", false) ? "PASS " : "FAIL ") << r.value("experiment", "")
              << " n=" << lab::fmt17(r.at("n")) << " estimate="
              << lab::fmt17(r.at("estimate").at("exponent")) << " band=["
              << lab::fmt17(r.at("band")[0]) << ", " << lab::fmt17(r.at("band")[1]) << "]\n";
  }
  std::cout << "results: " << (res.dir / "results.json").string() << "\n";
}

int cmd_run(const std::string& spec_path, const Overrides& ov, bool report_csv) {
  auto spec = lab::load_spec(spec_path);
  ov.apply(spec);
  const auto res = lab::run(spec);
  print_records(res);
  if (report_csv) {
    std::ofstream csv(res.dir / "results.csv");
    std::ostringstream table;
    lab::report({(res.dir / "results.json").string()}, table, csv);
  }
  return res.all_pass ? kExitOk : kExitFail;
}

int cmd_oracle_check(const std::optional<std::string>& spec_path, const std::string& model,
                     int horizon, std::uint64_t replications, const Overrides& ov) {
  lab::ExperimentSpec spec;
  if (spec_path) {
    spec = lab::load_spec(*spec_path);
    if (spec.kind != "oracle-check")
      throw cmchain::ConfigError(*spec_path + ": kind must be oracle-check");
  } else {
    std::ostringstream text;
    text << "id = oracle-" << model << "-h" << horizon << "\nkind = oracle-check\nmodel = "
         << model << "\nhorizon = " << horizon << "\nreplications = " << replications << "\n";
    spec = lab::parse_spec(text.str(), "command line");
  }
  ov.apply(spec);
  const auto res = lab::run(spec);
  for (const auto& r : res.records) {
    for (const auto& cell : r["stats"]["law"]) {
      std::cout << "  gaps=" << cell["outcome"].dump() << " exact=" << cell["exact"].get<std::string>()
                << " freq=" << lab::fmt17(cell["frequency"]) << "\n";
    }
    if (r["stats"].contains("pz_matches"))
      std::cout << "  P_Z closed form matches enumeration: "
                << (r["stats"]["pz_matches"].get<bool>() ? "yes" : "no") << "\n";
    std::cout << (r.value("pass", false) ? "PASS" : "FAIL") << " oracle-check " << spec.model
              << " horizon=" << spec.horizon
              << " chi2 p=" << lab::fmt17(r["stats"]["p_value"]) << "\n";
  }
  return res.all_pass ? kExitOk : kExitFail;
}

int cmd_report(const std::vector<std::string>& files, const std::optional<std::string>& csv_path) {
  std::ostringstream csv;
  const bool pass = lab::report(files, std::cout, csv);
  if (csv_path) {
    std::ofstream f(*csv_path);
    if (!f) throw cmchain::ConfigError("cannot write '" + *csv_path + "'");
    f << csv.str();
  } else {
    std::cout << "\n" << csv.str();
  }
  return pass ? kExitOk : kExitFail;
}

int cmd_list(const std::string& dir) {
  std::cout << "kinds:";
  for (const auto& k : lab::experiment_kinds()) std::cout << ' ' << k;
  std::cout << "\nmodels: cm cm-general dcm hier-N\n";
  if (!std::filesystem::is_directory(dir)) return kExitOk;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().extension() == ".cfg") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::cout << "experiments in " << dir << ":\n";
  for (const auto& p : files) {
    try {
      const auto s = lab::load_spec(p.string());
      std::cout << "  " << p.filename().string() << "  " << s.kind << " / " << s.model
                << "  (id " << s.id << ")\n";
    } catch (const cmchain::Error& e) {
      std::cout << "  " << p.filename().string() << "  invalid: " << e.what() << "\n";
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical random-walk chain experiments"};
  app.require_subcommand(1);

  Overrides ov;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out;
  auto add_overrides = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Master seed (overrides the spec)");
    sub->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", out, "Output directory");
  };

  std::string spec_path;
  bool write_csv = true;
  auto* run = app.add_subcommand("run", "Run an experiment spec");
  run->add_option("--spec", spec_path, "Experiment spec file")->required()->check(CLI::ExistingFile);
  run->add_flag("!--no-csv", write_csv, "Skip results.csv");
  add_overrides(run);

  std::vector<std::string> files;
  std::string csv_path;
  auto* rep = app.add_subcommand("report", "Summarise result files");
  rep->add_option("files", files, "results.json files")->required();
  rep->add_option("--csv", csv_path, "Write the CSV table here");

  std::string oc_spec;
  std::string model = "dcm";
  int horizon = 1;
  std::uint64_t oc_reps = 100000;
  auto* oc = app.add_subcommand("oracle-check", "Compare samplers with exact enumeration");
  oc->add_option("--spec", oc_spec, "oracle-check spec file")->check(CLI::ExistingFile);
  oc->add_option("--model", model, "cm, cm-general, dcm or hier-N");
  oc->add_option("--horizon", horizon, "Time horizon")->check(CLI::NonNegativeNumber);
  oc->add_option("--replications", oc_reps, "Sampler replications");
  add_overrides(oc);

  std::string list_dir = "configs";
  auto* ls = app.add_subcommand("list-experiments", "List experiment kinds and sample specs");
  ls->add_option("--dir", list_dir, "Directory of .cfg files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (auto* sub : {run, oc}) {
    if (!sub->parsed()) continue;
    if (sub->count("--seed")) ov.seed = seed;
    if (sub->count("--workers")) ov.workers = workers;
    if (sub->count("--out")) ov.out = out;
  }

  try {
    if (run->parsed()) return cmd_run(spec_path, ov, write_csv);
    if (rep->parsed())
      return cmd_report(files, rep->count("--csv") ? std::optional<std::string>(csv_path)
                                                   : std::nullopt);
    if (oc->parsed())
      return cmd_oracle_check(oc->count("--spec") ? std::optional<std::string>(oc_spec)
                                                  : std::nullopt,
                              model, horizon, oc_reps, ov);
    if (ls->parsed()) return cmd_list(list_dir);
  } catch (const cmchain::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const cmchain::SchemaMismatch& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const cmchain::InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitUsage;
}
