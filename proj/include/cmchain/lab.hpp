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

// Config-driven experiment runner. Needs OpenSSL (spec hashing) and threads.

#ifndef CMCHAIN_LAB_HPP_
#define CMCHAIN_LAB_HPP_

#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <openssl/sha.h>

#include <json.hpp>

#include "cmchain/chain.hpp"
#include "cmchain/error.hpp"
#include "cmchain/estimators.hpp"
#include "cmchain/exact.hpp"
#include "cmchain/limit.hpp"
#include "cmchain/renewal.hpp"
#include "cmchain/stopped_sums.hpp"

namespace cmchain::lab {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Experiment description.

struct ExperimentSpec {
  std::string id = "experiment";
  std::string kind;   // tail | scaling | limit-compare | oracle-check | stopped-sum | independence
  std::string model;  // cm | cm-general | dcm | hier-N
  std::string jump = "pm1";
  std::string grid_text;
  std::vector<double> grid;
  std::uint64_t replications = 1000;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out = "results";
  int horizon = 1;           // oracle-check
  double moment = 1.0;       // scaling: statistic E|X|^moment
  std::optional<std::pair<double, double>> expect;  // acceptance band override
  std::string stopping = "first-passage";            // stopped-sum

  int n_agents() const {
    if (model == "cm" || model == "cm-general") return 2;
    if (model == "dcm") return 3;
    return std::stoi(model.substr(5));
  }
  JumpDistribution jump_law() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

inline double parse_double(const std::string& v, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(where + ": not a number: '" + v + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& v, const std::string& where) {
  try {
    std::size_t pos = 0;
    const unsigned long long d = std::stoull(v, &pos);
    if (pos != v.size() || (!v.empty() && v[0] == '-')) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(where + ": not an unsigned integer: '" + v + "'");
  }
}

}  // namespace detail

/// Parses "pm1", "lattice:v:p,v:p,...", or "pareto:alpha=A,scale=S,shift=K".
inline JumpDistribution parse_jump(const std::string& text) {
  if (text == "pm1") return JumpDistribution::pm1();
  if (text.rfind("lattice:", 0) == 0) {
    std::map<std::int64_t, double> pmf;
    for (const auto& item : detail::split(text.substr(8), ',')) {
      const auto kv = detail::split(item, ':');
      if (kv.size() != 2) throw ConfigError("jump: bad lattice atom '" + item + "'");
      pmf[std::stoll(kv[0])] += detail::parse_double(kv[1], "jump");
    }
    try {
      return JumpDistribution::lattice(pmf);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("jump: ") + e.what());
    }
  }
  if (text.rfind("pareto:", 0) == 0) {
    double alpha = 1.5, scale = 1.0;
    std::int64_t shift = 0;
    for (const auto& item : detail::split(text.substr(7), ',')) {
      const auto kv = detail::split(item, '=');
      if (kv.size() != 2) throw ConfigError("jump: bad pareto parameter '" + item + "'");
      if (kv[0] == "alpha") alpha = detail::parse_double(kv[1], "jump");
      else if (kv[0] == "scale") scale = detail::parse_double(kv[1], "jump");
      else if (kv[0] == "shift") shift = std::stoll(kv[1]);
      else throw ConfigError("jump: unknown pareto parameter '" + kv[0] + "'");
    }
    try {
      return JumpDistribution::two_sided_pareto(alpha, scale, shift);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("jump: ") + e.what());
    }
  }
  throw ConfigError("jump: unknown law '" + text + "'");
}

inline JumpDistribution ExperimentSpec::jump_law() const { return parse_jump(jump); }

/// "geometric:lo:hi:ratio" or a comma-separated list.
inline std::vector<double> parse_grid(const std::string& text, const std::string& where) {
  std::vector<double> g;
  if (text.rfind("geometric:", 0) == 0) {
    const auto p = detail::split(text.substr(10), ':');
    if (p.size() != 3) throw ConfigError(where + ": geometric grid is lo:hi:ratio");
    const double lo = detail::parse_double(p[0], where);
    const double hi = detail::parse_double(p[1], where);
    const double r = detail::parse_double(p[2], where);
    if (lo <= 0 || hi < lo || r < 2.0) throw ConfigError(where + ": need 0 < lo <= hi, ratio >= 2");
    for (double x = lo; x <= hi * (1 + 1e-12); x *= r) g.push_back(std::round(x));
  } else {
    for (const auto& item : detail::split(text, ',')) g.push_back(detail::parse_double(item, where));
  }
  if (g.empty()) throw ConfigError(where + ": empty grid");
  for (std::size_t i = 1; i < g.size(); ++i)
    if (g[i] < 2.0 * g[i - 1] * (1 - 1e-12))
      throw ConfigError(where + ": grid must be geometric with ratio >= 2");
  return g;
}

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> k{"tail", "scaling", "limit-compare",
                                          "oracle-check", "stopped-sum", "independence"};
  return k;
}

/// Parses the key = value experiment format ('#' starts a comment).
inline ExperimentSpec parse_spec(const std::string& text, const std::string& source = "spec") {
  ExperimentSpec s;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::map<std::string, int> seen;
  bool has_kind = false, has_model = false, has_grid = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (seen.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    seen[key] = lineno;
    const std::string kw = where + " (" + key + ")";
    if (key == "id") {
      s.id = val;
    } else if (key == "kind") {
      s.kind = val;
      has_kind = true;
      if (std::find(experiment_kinds().begin(), experiment_kinds().end(), val) ==
          experiment_kinds().end())
        throw ConfigError(kw + ": unknown experiment kind '" + val + "'");
    } else if (key == "model") {
      s.model = val;
      has_model = true;
      const bool hier = val.rfind("hier-", 0) == 0;
      if (!(val == "cm" || val == "cm-general" || val == "dcm" || hier))
        throw ConfigError(kw + ": unknown model '" + val + "'");
      if (hier) {
        const auto n = detail::parse_u64(val.substr(5), kw);
        if (n < 1 || n > 64) throw ConfigError(kw + ": hier-N needs 1 <= N <= 64");
      }
    } else if (key == "jump") {
      s.jump = val;
      try {
        parse_jump(val);
      } catch (const ConfigError& e) {
        throw ConfigError(kw + ": " + e.what());
      }
    } else if (key == "grid") {
      s.grid_text = val;
      s.grid = parse_grid(val, kw);
      has_grid = true;
    } else if (key == "replications") {
      s.replications = detail::parse_u64(val, kw);
      if (s.replications < 100) throw ConfigError(kw + ": replications must be >= 100");
    } else if (key == "seed") {
      s.seed = detail::parse_u64(val, kw);
    } else if (key == "workers") {
      s.workers = static_cast<int>(detail::parse_u64(val, kw));
      if (s.workers < 1) throw ConfigError(kw + ": workers must be >= 1");
    } else if (key == "out") {
      s.out = val;
    } else if (key == "horizon") {
      s.horizon = static_cast<int>(detail::parse_u64(val, kw));
    } else if (key == "moment") {
      s.moment = detail::parse_double(val, kw);
      if (s.moment <= 0) throw ConfigError(kw + ": moment must be positive");
    } else if (key == "expect") {
      const auto p = detail::split(val, ':');
      if (p.size() != 2) throw ConfigError(kw + ": expect is lo:hi");
      s.expect = {detail::parse_double(p[0], kw), detail::parse_double(p[1], kw)};
    } else if (key == "stopping") {
      s.stopping = val;
    } else {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
  if (!has_kind) throw ConfigError(source + ": missing key 'kind'");
  if (!has_model) throw ConfigError(source + ": missing key 'model'");
  if (!has_grid && s.kind != "oracle-check") throw ConfigError(source + ": missing key 'grid'");
  if (s.model == "cm-general" || s.jump == "pm1") {
  } else {
    throw ConfigError(source + ":" + std::to_string(seen["jump"]) +
                      " (jump): a jump law other than pm1 needs model = cm-general");
  }
  return s;
}

inline ExperimentSpec load_spec(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read spec file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_spec(ss.str(), path);
}

/// Canonical text of the fields that determine results (not workers/out).
inline std::string canonical_spec(const ExperimentSpec& s) {
  std::ostringstream os;
  os << "expect=" << (s.expect ? std::to_string(s.expect->first) + ":" + std::to_string(s.expect->second) : "")
     << "\ngrid=" << s.grid_text << "\nhorizon=" << s.horizon << "\nid=" << s.id
     << "\njump=" << s.jump << "\nkind=" << s.kind << "\nmodel=" << s.model
     << "\nmoment=" << s.moment << "\nreplications=" << s.replications << "\nseed=" << s.seed
     << "\nstopping=" << s.stopping << "\n";
  return os.str();
}

/// Git blob hash (SHA-1 of "blob <size>\0<content>") of the canonical spec.
inline std::string spec_hash(const ExperimentSpec& s) {
  const std::string body = canonical_spec(s);
  const std::string blob = "blob " + std::to_string(body.size()) + std::string(1, '\0') + body;
  unsigned char md[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), md);
  std::ostringstream os;
  for (unsigned char c : md) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(c);
  return os.str();
}

// ---------------------------------------------------------------------------
// Parallel replication loop. Replication r always writes slot r, so results
// do not depend on how blocks are spread over workers.

template <class F>
std::vector<double> replicate(std::uint64_t count, int workers, F&& one) {
  std::vector<double> out(count);
  constexpr std::uint64_t kBlock = 64;
  const std::uint64_t blocks = (count + kBlock - 1) / kBlock;
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (;;) {
      const std::uint64_t b = next.fetch_add(1);
      if (b >= blocks) return;
      try {
        for (std::uint64_t r = b * kBlock; r < std::min(count, (b + 1) * kBlock); ++r)
          out[r] = one(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next = blocks;
      }
    }
  };
  const int nw = std::max(1, std::min<int>(workers, static_cast<int>(blocks)));
  std::vector<std::thread> pool;
  for (int i = 1; i < nw; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

/// Seed for grid point i of an experiment.
inline std::uint64_t point_seed(std::uint64_t seed, std::size_t i) {
  return mix_stream_id(seed, static_cast<std::uint64_t>(i));
}

// ---------------------------------------------------------------------------
// Model samplers shared by the experiment kinds.

/// Last agent's position at time n for replication r.
inline double last_agent_at(const ExperimentSpec& s, double n, std::uint64_t seed,
                            std::uint64_t r) {
  const auto t = static_cast<Time>(n);
  if (s.model == "cm" || s.model == "cm-general") {
    const ChainConfig config{2, s.jump_law(), seed};
    return static_cast<double>(sample_last_agent(config, {t}, r)[0]);
  }
  if (s.model == "dcm") {
    // Coupled walk over regeneration cycles.
    RngStream rng(seed, r);
    const auto cycles = cycles_covering(ChainConfig::standard(3, seed), t, rng);
    return static_cast<double>(CtrwPath(cycles).at(static_cast<double>(t)).coupled);
  }
  return static_cast<double>(
      sample_last_agent_theta(s.n_agents(), static_cast<std::int64_t>(t), seed, r));
}

/// Theoretical growth exponent of |X(n)|.
inline double growth_exponent(const ExperimentSpec& s) {
  if (s.model == "cm") return 0.25;
  if (s.model == "dcm") return 0.125;
  if (s.model == "cm-general") {
    const auto j = s.jump_law();
    if (j.mean() != 0.0) return 0.5;
    return 0.5 / j.stable_index();
  }
  return std::pow(0.5, s.n_agents());
}

inline std::pair<double, double> band(const ExperimentSpec& s, double lo, double hi) {
  return s.expect ? *s.expect : std::make_pair(lo, hi);
}

struct PointResult {
  json record;        // one JSON object per grid point
  bool pass = true;
  double statistic = 0.0;
  double stderr_value = 0.0;
  double reference = 0.0;
};

inline json summary_stats(const std::vector<double>& v) {
  json j;
  j["mean"] = mean(v);
  j["stderr"] = mean_stderr(v);
  j["q05"] = quantile(v, 0.05);
  j["q25"] = quantile(v, 0.25);
  j["q50"] = quantile(v, 0.5);
  j["q75"] = quantile(v, 0.75);
  j["q95"] = quantile(v, 0.95);
  return j;
}

inline std::vector<double> quantile_table_of(const std::vector<double>& v) {
  return EcdfTable::from_samples(v).quantile_table(1024);
}

// ---------------------------------------------------------------------------
// Experiment kinds. Each returns the per-point records; estimates that span
// the grid are written into every record.

struct RunContext {
  const ExperimentSpec& spec;
  std::string hash;
  std::filesystem::path dir;
  int workers;
};

/// Loads a finished grid point from an earlier (interrupted) run.
inline std::optional<json> load_point(const RunContext& ctx, std::size_t i) {
  const auto path = ctx.dir / ("point_" + std::to_string(i) + ".json");
  if (!std::filesystem::exists(path)) return std::nullopt;
  std::ifstream f(path);
  try {
    json j = json::parse(f);
    if (j.value("spec_hash", "") == ctx.hash && j.value("schema_version", 0) == kSchemaVersion)
      return j;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

inline void save_point(const RunContext& ctx, std::size_t i, const json& j) {
  const auto path = ctx.dir / ("point_" + std::to_string(i) + ".json");
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp);
    f << j.dump(1) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

inline json base_record(const RunContext& ctx, double n, std::uint64_t replications) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["n"] = n;
  j["replications"] = replications;
  j["seed"] = ctx.spec.seed;
  j["spec_hash"] = ctx.hash;
  return j;
}

/// Runs the per-point function with resume support.
template <class F>
std::vector<json> for_each_point(const RunContext& ctx, F&& compute) {
  std::vector<json> recs;
  for (std::size_t i = 0; i < ctx.spec.grid.size(); ++i) {
    if (auto j = load_point(ctx, i)) {
      recs.push_back(*j);
      continue;
    }
    json j = compute(i, ctx.spec.grid[i]);
    save_point(ctx, i, j);
    recs.push_back(j);
  }
  return recs;
}

inline std::vector<json> run_scaling(const RunContext& ctx) {
  const auto& s = ctx.spec;
  auto recs = for_each_point(ctx, [&](std::size_t i, double n) {
    const std::uint64_t ps = point_seed(s.seed, i);
    const auto x = replicate(s.replications, ctx.workers,
                             [&](std::uint64_t r) { return last_agent_at(s, n, ps, r); });
    std::vector<double> stat(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) stat[k] = std::pow(std::abs(x[k]), s.moment);
    json j = base_record(ctx, n, s.replications);
    j["stats"] = summary_stats(stat);
    j["stats"]["x_quantiles"] = quantile_table_of(x);
    return j;
  });
  std::vector<double> n, m, se;
  for (const auto& r : recs) {
    n.push_back(r["n"]);
    m.push_back(r["stats"]["mean"]);
    se.push_back(r["stats"]["stderr"]);
  }
  const double ref = s.moment * growth_exponent(s);
  const auto [lo, hi] = band(s, ref - 0.03, ref + 0.03);
  const auto est = scaling_exponent(m, n, se);
  for (auto& r : recs) {
    r["estimate"] = {{"exponent", est.exponent}, {"stderr", est.std_err}};
    r["reference"] = ref;
    r["band"] = {lo, hi};
    r["pass"] = est.exponent >= lo && est.exponent <= hi;
  }
  return recs;
}

/// Durations of regeneration cycles (replications = number of cycles).
inline std::vector<double> cycle_durations(const ExperimentSpec& s, int workers) {
  const ChainConfig config{s.n_agents(), s.jump_law(), s.seed};
  if (!(s.model == "cm" || s.model == "cm-general" || s.model == "dcm"))
    throw ConfigError("tail: model must be cm, cm-general or dcm");
  return replicate(s.replications, workers, [&](std::uint64_t r) {
    RngStream rng(point_seed(s.seed, 0), r);
    return static_cast<double>(sample_cycle(config, rng).duration);
  });
}

inline std::vector<json> tail_records(const RunContext& ctx, const std::vector<double>& sample,
                                      double ref, double lo, double hi) {
  const auto& s = ctx.spec;
  std::vector<double> asc(sample);
  std::sort(asc.begin(), asc.end());
  const auto fit = loglog_tail(sample, s.grid.front(), s.grid.back(),
                               static_cast<int>(s.grid.size()));
  const bool pass = fit.exponent >= lo && fit.exponent <= hi;
  std::vector<json> recs;
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    const double n = s.grid[i];
    const double surv = survival_sorted(asc, n);
    json j = base_record(ctx, n, s.replications);
    j["stats"] = {{"survival", surv},
                  {"survival_stderr", std::sqrt(surv * (1 - surv) / static_cast<double>(asc.size()))},
                  {"scaled_survival", surv * std::pow(n, ref)}};
    j["estimate"] = {{"exponent", fit.exponent}, {"stderr", fit.std_err}};
    j["reference"] = ref;
    j["band"] = {lo, hi};
    j["pass"] = pass;
    recs.push_back(j);
  }
  return recs;
}

inline std::vector<json> run_tail(const RunContext& ctx) {
  const auto& s = ctx.spec;
  const double ref = s.model == "dcm" ? 0.25 : 0.5;
  const auto [lo, hi] = band(s, ref - 0.05, ref + 0.05);
  return tail_records(ctx, cycle_durations(s, ctx.workers), ref, lo, hi);
}

inline StoppedSumSpec stopped_sum_spec(const ExperimentSpec& s) {
  StoppedSumSpec ss;
  ss.increment = StoppedSumSpec::Increment::first_passage;
  const auto parts = detail::split(s.stopping, ':');
  const std::string kind = parts[0];
  auto param = [&](const char* name) {
    if (parts.size() != 2) throw ConfigError(std::string("stopping: ") + kind + " needs :" + name);
    return detail::parse_double(parts[1], "stopping");
  };
  if (kind == "first-passage") {
    ss.stopping = StoppedSumSpec::Stopping::first_passage;
  } else if (kind == "geometric") {
    ss.stopping = StoppedSumSpec::Stopping::geometric;
    ss.p = param("p");
  } else if (kind == "pareto") {
    ss.stopping = StoppedSumSpec::Stopping::pareto;
    ss.beta = param("beta");
  } else if (kind == "constant") {
    ss.stopping = StoppedSumSpec::Stopping::constant;
    ss.k = static_cast<std::uint64_t>(param("k"));
  } else {
    throw ConfigError("stopping: unknown law '" + s.stopping + "'");
  }
  try {
    ss.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("stopping: ") + e.what());
  }
  return ss;
}

inline std::vector<json> run_stopped_sum(const RunContext& ctx) {
  const auto& s = ctx.spec;
  if (s.model != "cm") throw ConfigError("stopped-sum: model must be cm (first-passage increments)");
  const auto ss = stopped_sum_spec(s);
  const std::uint64_t ps = point_seed(s.seed, 0);
  const auto sample = replicate(s.replications, ctx.workers, [&](std::uint64_t r) {
    RngStream stop(ps, 2 * r), inc(ps, 2 * r + 1);
    return static_cast<double>(sample_stopped_sum(ss, stop, inc));
  });
  const double beta = ss.stopping_index();
  const double ref = beta > 0 ? 0.5 * beta : 0.5;
  const auto [lo, hi] = band(s, ref - 0.04, ref + 0.04);
  return tail_records(ctx, sample, ref, lo, hi);
}

inline std::vector<json> run_limit_compare(const RunContext& ctx) {
  const auto& s = ctx.spec;
  LimitKind kind;
  LimitParams params;
  if (s.model == "cm") {
    kind = LimitKind::cm_standard;
  } else if (s.model == "dcm") {
    kind = LimitKind::dcm;
  } else if (s.model == "cm-general") {
    const auto j = s.jump_law();
    if (j.mean() != 0.0) {
      kind = LimitKind::general_nonzero_mean;
      params.mu = j.mean();
    } else {
      kind = LimitKind::general_zero_mean;
      params.alpha = j.stable_index();
    }
  } else {
    throw ConfigError("limit-compare: model must be cm, cm-general or dcm");
  }
  const auto [lo, hi] = band(s, 0.0, s.model == "cm" ? 0.03 : 0.05);
  return for_each_point(ctx, [&](std::size_t i, double n) {
    const std::uint64_t ps = point_seed(s.seed, i);
    auto x = replicate(s.replications, ctx.workers,
                       [&](std::uint64_t r) { return last_agent_at(s, n, ps, r); });
    const std::uint64_t rs = mix_stream_id(ps, 0x6c696d6974ull);  // reference family
    const auto ref = replicate(s.replications, ctx.workers, [&](std::uint64_t r) {
      RngStream rng(rs, r);
      return sample_limit(kind, params, 1.0, rng).value;
    });
    const double c = median_scale(x, ref);
    for (double& v : x) v *= c;
    const double ks = ks_distance(x, ref);
    json j = base_record(ctx, n, s.replications);
    j["stats"] = {{"ks", ks}, {"calibration", c}, {"limit", to_string(kind)},
                  {"x_quantiles", quantile_table_of(x)}};
    j["estimate"] = {{"exponent", growth_exponent(s)}, {"stderr", 0.0}};
    j["reference"] = hi;
    j["band"] = {lo, hi};
    j["pass"] = ks >= lo && ks <= hi;
    return j;
  });
}

inline std::vector<json> run_independence(const RunContext& ctx) {
  const auto& s = ctx.spec;
  if (!(s.model == "cm" || s.model == "cm-general"))
    throw ConfigError("independence: model must be cm or cm-general");
  const auto jump = s.jump_law();
  const auto [lo, hi] = band(s, 1e-3, 1.0);
  return for_each_point(ctx, [&](std::size_t i, double n) {
    const std::uint64_t ps = point_seed(s.seed, i);
    const auto count = static_cast<std::uint64_t>(n);
    const double bn = jump.mean() != 0.0 ? n : jump.normalizer(n);
    std::vector<double> t(s.replications);
    const auto x = replicate(s.replications, ctx.workers, [&](std::uint64_t r) {
      RngStream rng(ps, r);
      double sum = 0.0;
      Time total = 0;
      for (std::uint64_t k = 0; k < count; ++k) {
        const auto c = sample_j2(jump, rng);
        sum += static_cast<double>(c.displacement);
        total = sat_add(total, c.duration);
      }
      t[r] = static_cast<double>(total) / (n * n);
      return sum / bn;
    });
    RngStream perm(mix_stream_id(ps, 0x7065726dull), 0);
    const auto d = independence_diag(x, t, perm);
    json j = base_record(ctx, n, s.replications);
    j["stats"] = {{"pearson", d.pearson}, {"spearman", d.spearman},
                  {"spearman_abs", d.spearman_abs}, {"rank_statistic", d.rank_statistic},
                  {"p_value", d.p_value}, {"permutations", d.permutations},
                  {"distance_correlation", d.distance_correlation}};
    j["estimate"] = {{"exponent", d.rank_statistic}, {"stderr", 1.0 / std::sqrt(static_cast<double>(s.replications))}};
    j["reference"] = lo;
    j["band"] = {lo, hi};
    j["pass"] = d.p_value >= lo && d.p_value <= hi;
    return j;
  });
}

inline std::string rational_text(const Rational& r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

inline std::vector<json> run_oracle_check(const RunContext& ctx) {
  const auto& s = ctx.spec;
  if (s.model == "cm-general" && s.jump_law().kind() == JumpDistribution::Kind::two_sided_pareto)
    throw ConfigError("oracle-check: jump law must have finite support");
  const ChainConfig config{s.n_agents(), s.jump_law(), point_seed(s.seed, 0)};
  const auto exact = enumerate(config, s.horizon, Projection::gaps);
  // Sampler side: step-by-step simulation, gap vector at the horizon.
  std::map<Outcome, double> counts;
  std::mutex mu;
  replicate(s.replications, ctx.workers, [&](std::uint64_t r) {
    const auto path = simulate_path(config, static_cast<Time>(s.horizon),
                                    RecordingPolicy::at({static_cast<Time>(s.horizon)}), r);
    const auto& pos = path.positions.back();
    Outcome key;
    for (std::size_t i = 0; i + 1 < pos.size(); ++i) key.push_back(std::abs(pos[i] - pos[i + 1]));
    std::lock_guard<std::mutex> lock(mu);
    counts[key] += 1.0;
    return 0.0;
  });
  std::vector<double> obs, probs;
  json law = json::array();
  for (const auto& [k, p] : exact.probs) {
    obs.push_back(counts.count(k) ? counts[k] : 0.0);
    probs.push_back(static_cast<double>(p));
    law.push_back({{"outcome", k}, {"exact", rational_text(p)},
                   {"frequency", obs.back() / static_cast<double>(s.replications)}});
  }
  double unmatched = 0.0;
  for (const auto& [k, c] : counts)
    if (!exact.probs.count(k)) unmatched += c;
  const auto chi = chi_square(obs, probs);
  bool pass = chi.p_value > 1e-4 && unmatched == 0.0 && exact.total() == 1;
  json j = base_record(ctx, s.horizon, s.replications);
  j["stats"] = {{"law", law}, {"chi_square", chi.statistic}, {"dof", chi.dof},
                {"p_value", chi.p_value}, {"total_mass", rational_text(exact.total())}};
  if (s.model == "dcm") {
    const bool pz_equal = exact_pz() == z_transition_matrix();
    j["stats"]["pz_matches"] = pz_equal;
    pass = pass && pz_equal;
  }
  j["estimate"] = {{"exponent", chi.p_value}, {"stderr", 0.0}};
  j["reference"] = 1e-4;
  j["band"] = {1e-4, 1.0};
  j["pass"] = pass;
  return {j};
}

struct RunResult {
  std::vector<json> records;
  bool all_pass = true;
  std::filesystem::path dir;
};

/// Runs an experiment into `<out>/<id>/`: spec copy, point files (resume),
/// results.json, results.csv and timing.json. results.json and the CSV are a
/// function of the spec and seed only.
inline RunResult run(const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  RunContext ctx{spec, spec_hash(spec), std::filesystem::path(spec.out) / spec.id, spec.workers};
  std::filesystem::create_directories(ctx.dir);
  {
    std::ofstream f(ctx.dir / "spec.cfg");
    f << canonical_spec(spec);
  }
  std::vector<json> recs;
  if (spec.kind == "scaling") recs = run_scaling(ctx);
  else if (spec.kind == "tail") recs = run_tail(ctx);
  else if (spec.kind == "stopped-sum") recs = run_stopped_sum(ctx);
  else if (spec.kind == "limit-compare") recs = run_limit_compare(ctx);
  else if (spec.kind == "independence") recs = run_independence(ctx);
  else if (spec.kind == "oracle-check") recs = run_oracle_check(ctx);
  else throw ConfigError("unknown experiment kind '" + spec.kind + "'");

  RunResult res;
  res.dir = ctx.dir;
  for (auto& r : recs) {
    r["experiment"] = spec.id;
    r["kind"] = spec.kind;
    r["model"] = spec.model;
    res.all_pass = res.all_pass && r.value("pass", false);
  }
  json out;
  out["schema_version"] = kSchemaVersion;
  out["experiment"] = spec.id;
  out["spec_hash"] = ctx.hash;
  out["seed"] = spec.seed;
  out["records"] = recs;
  {
    std::ofstream f(ctx.dir / "results.json");
    f << out.dump(1) << "\n";
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  {
    std::ofstream f(ctx.dir / "timing.json");
    f << json{{"wall_clock_seconds", secs}, {"workers", spec.workers}}.dump(1) << "\n";
  }
  res.records = std::move(recs);
  return res;
}

// ---------------------------------------------------------------------------
// Reporting.

inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Main statistic of a record and its standard error.
inline std::pair<double, double> record_statistic(const json& r) {
  const std::string kind = r.value("kind", "");
  const json& st = r.at("stats");
  if (kind == "scaling") return {st.at("mean"), st.at("stderr")};
  if (kind == "tail" || kind == "stopped-sum") return {st.at("survival"), st.at("survival_stderr")};
  if (kind == "limit-compare") return {st.at("ks"), 0.0};
  if (kind == "independence") return {st.at("p_value"), 0.0};
  if (kind == "oracle-check") return {st.at("p_value"), 0.0};
  throw SchemaMismatch("record of unknown kind '" + kind + "'");
}

inline json read_results(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read result file '" + path + "'");
  json j;
  try {
    j = json::parse(f);
  } catch (const std::exception& e) {
    throw SchemaMismatch(path + ": not a result file (" + e.what() + ")");
  }
  if (!j.contains("schema_version") || j["schema_version"] != kSchemaVersion)
    throw SchemaMismatch(path + ": unsupported schema version");
  if (!j.contains("records") || j["records"].empty())
    throw SchemaMismatch(path + ": no statistics to report");
  return j;
}

/// CSV columns: experiment, kind, n, statistic, stderr, exponent,
/// exponent_stderr, reference, pass. Returns whether all records pass.
inline bool report(const std::vector<std::string>& files, std::ostream& table,
                   std::ostream& csv) {
  cmchain::detail::require(!files.empty(), "report: no result files");
  bool all = true;
  csv << "experiment,kind,n,statistic,stderr,exponent,exponent_stderr,reference,pass\n";
  table << std::left << std::setw(22) << "experiment" << std::setw(14) << "kind"
        << std::setw(16) << "n" << std::setw(14) << "statistic" << std::setw(12) << "exponent"
        << std::setw(12) << "reference" << "pass\n";
  for (const auto& path : files) {
    const json j = read_results(path);
    for (const auto& r : j["records"]) {
      const auto [stat, se] = record_statistic(r);
      const double exponent = r.at("estimate").at("exponent");
      const double exp_se = r.at("estimate").at("stderr");
      const double ref = r.value("reference", 0.0);
      const bool pass = r.value("pass", false);
      all = all && pass;
      const std::string id = r.value("experiment", "");
      const std::string kind = r.value("kind", "");
      const double n = r.at("n");
      csv << id << ',' << kind << ',' << fmt17(n) << ',' << fmt17(stat) << ',' << fmt17(se)
          << ',' << fmt17(exponent) << ',' << fmt17(exp_se) << ',' << fmt17(ref) << ','
          << (pass ? "true" : "false") << '\n';
      table << std::left << std::setw(22) << id << std::setw(14) << kind << std::setw(16)
            << std::setprecision(6) << n << std::setw(14) << stat << std::setw(12) << exponent
            << std::setw(12) << ref << (pass ? "PASS" : "FAIL") << '\n';
    }
  }
  return all;
}

}  // namespace cmchain::lab

#endif  // CMCHAIN_LAB_HPP_
