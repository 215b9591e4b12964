#include "tofra/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "tofra/rng.hpp"
#include "tofra/scenario_io.hpp"

namespace tofra {

using nlohmann::json;

const char* to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::Tofra: return "TOFRA";
    case Scheme::BestPath: return "BP";
    case Scheme::FullMultipath: return "FMP";
    case Scheme::RoundRobin: return "RR";
  }
  return "?";
}

std::optional<Scheme> scheme_from_string(const std::string& s) {
  std::string t;
  for (char c : s) t.push_back(static_cast<char>(std::tolower(c)));
  if (t == "tofra") return Scheme::Tofra;
  if (t == "bp" || t == "best-path" || t == "bestpath") return Scheme::BestPath;
  if (t == "fmp" || t == "full-multipath") return Scheme::FullMultipath;
  if (t == "rr" || t == "round-robin") return Scheme::RoundRobin;
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  if (scenarios.files.empty()) {
    scenarios.generate.validate();
    if (scenarios.count < 1)
      throw std::invalid_argument("experiment: scenario count must be >= 1");
  }
  if (gammas.empty()) throw std::invalid_argument("experiment: no gamma values");
  for (double g : gammas)
    if (!(g > 0.0)) throw std::invalid_argument("experiment: gamma must be > 0");
  if (k_list.empty())
    throw std::invalid_argument("experiment: k_dominant list must not be empty");
  for (const auto& k : k_list)
    if (k && *k < 0)
      throw std::invalid_argument("experiment: k_dominant entries must be >= 0");
  if (replications < 1)
    throw std::invalid_argument("experiment: replications must be >= 1");
  sim.validate();
  sa.validate();
}

namespace {

// Formatting helpers. All report numbers go through these so reruns of the
// same configuration are byte-identical.
std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}
std::string fmt_gamma(double g) { return fmt("%g", g); }
std::string fmt_opt(const std::optional<double>& v, const char* spec) {
  return v ? fmt(spec, *v) : std::string();
}
std::string fmt_rates(const RateVector& rates) {
  std::string out;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (i) out += ';';
    out += fmt("%.4f", rates[i]);
  }
  return out;
}
std::string fmt_k(const std::optional<int>& k) {
  return k ? std::to_string(*k) : std::string("N");
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

// Stable seed-path tags per pipeline stage.
enum : std::uint64_t { kSeedGen = 101, kSeedSolve = 202, kSeedSim = 303 };

std::uint64_t scheme_tag(Scheme s) { return static_cast<std::uint64_t>(s); }
std::uint64_t k_tag(const std::optional<int>& k) {
  return k ? static_cast<std::uint64_t>(*k) : 0xFFFFULL;
}

struct Cell {
  int scenario_id;
  std::size_t gamma_idx;
  Scheme scheme;
  std::optional<int> k;
};

ResultRow run_cell(const ExperimentConfig& config, const Scenario& base,
                   const Cell& cell) {
  ResultRow row;
  row.scenario_id = cell.scenario_id;
  row.gamma = config.gammas[cell.gamma_idx];
  row.scheme = cell.scheme;
  row.k = cell.scheme == Scheme::Tofra ? cell.k : std::nullopt;

  Scenario scn = base;
  scn.phy.gamma = row.gamma;

  const std::uint64_t cell_path[] = {
      static_cast<std::uint64_t>(cell.scenario_id), cell.gamma_idx,
      scheme_tag(cell.scheme), k_tag(row.k)};

  // allocate; the solver seed ignores K so that truncation levels with an
  // identical effective problem anneal identically and the K comparison
  // isolates the truncation effect
  SourcePolicy policy;
  switch (cell.scheme) {
    case Scheme::Tofra: {
      SaParams sa = config.sa;
      sa.seed = derive_seed(config.master_seed, {kSeedSolve, cell_path[0],
                                                 cell_path[1], cell_path[2]});
      AllocationProblem problem(scn, row.k);
      AllocationResult res = solve_sa(problem, sa);
      row.rates = res.rates;
      row.aat_numerical = res.predicted_aat;
      policy = SourcePolicy::from_rates(res.rates);
      break;
    }
    case Scheme::BestPath: {
      SaParams sa = config.sa;
      sa.seed = derive_seed(config.master_seed, {kSeedSolve, cell_path[0],
                                                 cell_path[1], cell_path[2]});
      AllocationResult res = baseline_best_path(scn, std::nullopt, sa);
      row.rates = res.rates;
      row.aat_numerical = res.predicted_aat;
      policy = SourcePolicy::from_rates(res.rates);
      break;
    }
    case Scheme::FullMultipath: {
      row.rates = baseline_fmp(scn);
      row.aat_numerical = aggregate_throughput(scn, row.rates, std::nullopt);
      policy = SourcePolicy::from_rates(row.rates);
      break;
    }
    case Scheme::RoundRobin: {
      const RoundRobinSchedule rr = baseline_rr(scn);
      policy = SourcePolicy::round_robin(rr);
      row.rates.assign(scn.flows.size(),
                       1.0 / static_cast<double>(rr.num_flows));
      break;
    }
  }

  // simulate
  std::vector<double> aats;
  aats.reserve(static_cast<std::size_t>(config.replications));
  bool stable = true;
  for (int rep = 0; rep < config.replications; ++rep) {
    SimConfig sim = config.sim;
    sim.seed = derive_seed(config.master_seed,
                           {kSeedSim, cell_path[0], cell_path[1], cell_path[2],
                            cell_path[3], static_cast<std::uint64_t>(rep)});
    const SimMetrics metrics = run_simulation(scn, policy, sim);
    aats.push_back(metrics.aat);
    for (const auto& verdict : queue_stability_report(metrics))
      stable = stable && verdict.stable;
  }
  double mean = 0.0;
  for (double a : aats) mean += a;
  mean /= static_cast<double>(aats.size());
  double stderr_val = 0.0;
  if (aats.size() > 1) {
    double ss = 0.0;
    for (double a : aats) ss += (a - mean) * (a - mean);
    stderr_val = std::sqrt(ss / static_cast<double>(aats.size() - 1)) /
                 std::sqrt(static_cast<double>(aats.size()));
  }
  row.aat_sim_mean = mean;
  row.aat_sim_stderr = stderr_val;
  row.stable = stable;
  if (row.aat_numerical && *row.aat_numerical > 0.0)
    row.deviation_pct =
        100.0 * (mean - *row.aat_numerical) / *row.aat_numerical;
  return row;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentReport report;

  // scenarios
  if (!config.scenarios.files.empty()) {
    for (const std::string& path : config.scenarios.files)
      report.scenarios.push_back(load_scenario(path));
  } else {
    const double min_gamma =
        *std::min_element(config.gammas.begin(), config.gammas.end());
    for (int i = 0; i < config.scenarios.count; ++i) {
      GenParams gen = config.scenarios.generate;
      gen.phy.gamma = min_gamma;  // edge threshold at the mildest sweep point
      bool placed = false;
      for (int r = 0; r < gen.max_retries && !placed; ++r) {
        gen.seed = derive_seed(config.master_seed,
                               {kSeedGen, static_cast<std::uint64_t>(i),
                                static_cast<std::uint64_t>(r)});
        const Scenario unrouted = generate_scenario(gen);
        PathSelection sel;
        try {
          sel = select_disjoint_paths(unrouted, gen.p_min);
        } catch (const std::runtime_error&) {
          continue;  // graph had no edges; retry with a derived seed
        }
        if (sel.scenario.flows.size() <
            static_cast<std::size_t>(config.min_routed_flows))
          continue;
        for (std::uint32_t id : sel.dropped_flows)
          report.warnings.push_back("scenario " + std::to_string(i) +
                                    ": dropped flow " + std::to_string(id) +
                                    " (no disjoint path)");
        report.scenarios.push_back(std::move(sel.scenario));
        placed = true;
      }
      if (!placed)
        throw std::runtime_error("experiment: could not generate scenario " +
                                 std::to_string(i) + " with " +
                                 std::to_string(config.min_routed_flows) +
                                 " routed flow(s)");
    }
  }

  // cell grid, in report order
  std::vector<Cell> cells;
  for (int sc = 0; sc < static_cast<int>(report.scenarios.size()); ++sc)
    for (std::size_t gi = 0; gi < config.gammas.size(); ++gi)
      for (Scheme scheme : config.schemes) {
        if (scheme == Scheme::Tofra) {
          for (const auto& k : config.k_list) cells.push_back({sc, gi, scheme, k});
        } else {
          cells.push_back({sc, gi, scheme, std::nullopt});
        }
      }

  report.rows.resize(cells.size());
  std::atomic<std::size_t> next{0};
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_workers = std::min<std::size_t>(
      cells.size(),
      config.workers > 0 ? static_cast<std::size_t>(config.workers) : hw);

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const Cell& cell = cells[i];
      try {
        report.rows[i] = run_cell(
            config, report.scenarios[static_cast<std::size_t>(cell.scenario_id)],
            cell);
      } catch (const std::exception& e) {
        ResultRow& row = report.rows[i];
        row.scenario_id = cell.scenario_id;
        row.gamma = config.gammas[cell.gamma_idx];
        row.scheme = cell.scheme;
        row.k = cell.scheme == Scheme::Tofra ? cell.k : std::nullopt;
        row.status = std::string("error: ") + e.what();
      }
    }
  };

  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return report;
}

std::string report_to_csv(const ExperimentReport& report) {
  std::string out = kReportHeader;
  out += '\n';
  for (const ResultRow& r : report.rows) {
    out += std::to_string(r.scenario_id);
    out += ',';
    out += fmt_gamma(r.gamma);
    out += ',';
    out += to_string(r.scheme);
    out += ',';
    out += fmt_k(r.k);
    out += ',';
    out += fmt_opt(r.aat_numerical, "%.6f");
    out += ',';
    out += fmt_opt(r.aat_sim_mean, "%.6f");
    out += ',';
    out += fmt_opt(r.aat_sim_stderr, "%.6f");
    out += ',';
    out += fmt_opt(r.deviation_pct, "%.3f");
    out += ',';
    out += fmt_rates(r.rates);
    out += ',';
    out += r.status == "ok" ? (r.stable ? "yes" : "no") : "";
    out += ',';
    out += sanitize(r.status);
    out += '\n';
  }
  return out;
}

void write_report_csv(const ExperimentReport& report, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error(path + ": cannot open for writing");
  f << report_to_csv(report);
  if (!f) throw std::runtime_error(path + ": write failed");
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

ExperimentReport read_report_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error(path + ": cannot open report file");
  std::string line;
  if (!std::getline(f, line) || line != kReportHeader)
    throw std::runtime_error(path + ": unexpected report header");
  ExperimentReport report;
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 11)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 11 columns, found " +
                               std::to_string(cols.size()));
    ResultRow r;
    r.scenario_id = std::stoi(cols[0]);
    r.gamma = std::stod(cols[1]);
    const auto scheme = scheme_from_string(cols[2]);
    if (!scheme)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": unknown scheme '" + cols[2] + "'");
    r.scheme = *scheme;
    r.k = cols[3] == "N" ? std::nullopt : std::optional<int>(std::stoi(cols[3]));
    if (!cols[4].empty()) r.aat_numerical = std::stod(cols[4]);
    if (!cols[5].empty()) r.aat_sim_mean = std::stod(cols[5]);
    if (!cols[6].empty()) r.aat_sim_stderr = std::stod(cols[6]);
    if (!cols[7].empty()) r.deviation_pct = std::stod(cols[7]);
    if (!cols[8].empty())
      for (const std::string& q : split(cols[8], ';'))
        r.rates.push_back(std::stod(q));
    r.stable = cols[9] == "yes";
    r.status = cols[10];
    report.rows.push_back(std::move(r));
  }
  return report;
}

void emit_plotdata(const ExperimentReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  std::vector<double> gammas;
  for (const ResultRow& r : report.rows)
    if (std::find(gammas.begin(), gammas.end(), r.gamma) == gammas.end())
      gammas.push_back(r.gamma);
  std::sort(gammas.begin(), gammas.end());

  std::vector<std::optional<int>> k_levels;  // encounter order (N first in reports)
  for (const ResultRow& r : report.rows)
    if (r.scheme == Scheme::Tofra &&
        std::find(k_levels.begin(), k_levels.end(), r.k) == k_levels.end())
      k_levels.push_back(r.k);

  auto open_out = [&](const std::string& stem, double gamma) {
    const std::string path =
        (fs::path(out_dir) / (stem + "_gamma" + fmt_gamma(gamma) + ".csv"))
            .string();
    std::ofstream f(path);
    if (!f) throw std::runtime_error(path + ": cannot open for writing");
    return f;
  };

  for (double gamma : gammas) {
    std::vector<int> ids;
    for (const ResultRow& r : report.rows)
      if (r.gamma == gamma &&
          std::find(ids.begin(), ids.end(), r.scenario_id) == ids.end())
        ids.push_back(r.scenario_id);
    std::sort(ids.begin(), ids.end());

    auto find_row = [&](int id, Scheme scheme,
                        std::optional<int> k) -> const ResultRow* {
      for (const ResultRow& r : report.rows)
        if (r.gamma == gamma && r.scenario_id == id && r.scheme == scheme &&
            (scheme != Scheme::Tofra || r.k == k))
          return &r;
      return nullptr;
    };
    const std::optional<int> k_ref =
        k_levels.empty() ? std::nullopt : k_levels.front();

    {
      auto f = open_out("model_vs_sim", gamma);
      f << "scenario_id,aat_numerical,aat_sim_mean,aat_sim_stderr\n";
      for (int id : ids) {
        const ResultRow* r = find_row(id, Scheme::Tofra, k_ref);
        if (!r) continue;
        f << id << ',' << fmt_opt(r->aat_numerical, "%.6f") << ','
          << fmt_opt(r->aat_sim_mean, "%.6f") << ','
          << fmt_opt(r->aat_sim_stderr, "%.6f") << '\n';
      }
    }
    {
      auto f = open_out("scheme_comparison", gamma);
      f << "scenario,TOFRA,FMP,BP,RR\n";
      for (int id : ids) {
        const ResultRow* t = find_row(id, Scheme::Tofra, k_ref);
        const ResultRow* fmp = find_row(id, Scheme::FullMultipath, std::nullopt);
        const ResultRow* bp = find_row(id, Scheme::BestPath, std::nullopt);
        const ResultRow* rr = find_row(id, Scheme::RoundRobin, std::nullopt);
        auto cell = [&](const ResultRow* r) {
          return r ? fmt_opt(r->aat_sim_mean, "%.6f") : std::string();
        };
        f << id << ',' << cell(t) << ',' << cell(fmp) << ',' << cell(bp) << ','
          << cell(rr) << '\n';
      }
    }
    {
      auto f = open_out("k_dominant", gamma);
      f << "scenario";
      for (const auto& k : k_levels) f << ",K_" << fmt_k(k);
      f << '\n';
      for (int id : ids) {
        f << id;
        for (const auto& k : k_levels) {
          const ResultRow* r = find_row(id, Scheme::Tofra, k);
          f << ',' << (r ? fmt_opt(r->aat_numerical, "%.6f") : std::string());
        }
        f << '\n';
      }
    }
  }
}

namespace {

template <typename T>
void read_field(const json& obj, const char* key, T& out,
                const std::string& origin, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw std::runtime_error(origin + ": " + where + ": field '" + key +
                             "' has the wrong type");
  }
}

}  // namespace

ExperimentConfig experiment_config_from_json_text(const std::string& text,
                                                  const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(origin + ": not valid JSON: " + e.what());
  }
  if (!root.is_object())
    throw std::runtime_error(origin + ": top level must be an object");

  ExperimentConfig cfg;
  if (root.contains("scenario_files")) {
    read_field(root, "scenario_files", cfg.scenarios.files, origin, "scenarios");
  }
  if (root.contains("scenarios")) {
    const json& s = root["scenarios"];
    read_field(s, "count", cfg.scenarios.count, origin, "scenarios");
    GenParams& gen = cfg.scenarios.generate;
    read_field(s, "nodes", gen.node_count, origin, "scenarios");
    if (s.contains("area")) {
      const json& a = s["area"];
      if (a.is_array() && a.size() == 2) {
        gen.area_w = a[0].get<double>();
        gen.area_h = a[1].get<double>();
      } else if (a.is_number()) {
        gen.area_w = gen.area_h = a.get<double>();
      } else {
        throw std::runtime_error(origin +
                                 ": scenarios.area must be a number or [w, h]");
      }
    }
    read_field(s, "min_flows", gen.min_flows, origin, "scenarios");
    read_field(s, "max_flows", gen.max_flows, origin, "scenarios");
    read_field(s, "p_min", gen.p_min, origin, "scenarios");
    read_field(s, "relay_tx_prob", gen.relay_tx_prob, origin, "scenarios");
    read_field(s, "max_retries", gen.max_retries, origin, "scenarios");
    if (s.contains("phy")) {
      const json& p = s["phy"];
      read_field(p, "gamma", gen.phy.gamma, origin, "scenarios.phy");
      read_field(p, "eta", gen.phy.eta, origin, "scenarios.phy");
      read_field(p, "p_tx", gen.phy.p_tx, origin, "scenarios.phy");
      read_field(p, "alpha", gen.phy.alpha, origin, "scenarios.phy");
      read_field(p, "v", gen.phy.v, origin, "scenarios.phy");
    }
  }
  read_field(root, "gammas", cfg.gammas, origin, "experiment");
  if (root.contains("schemes")) {
    cfg.schemes.clear();
    for (const json& js : root["schemes"]) {
      const auto s = scheme_from_string(js.get<std::string>());
      if (!s)
        throw std::runtime_error(origin + ": unknown scheme '" +
                                 js.get<std::string>() + "'");
      cfg.schemes.push_back(*s);
    }
  }
  if (root.contains("k_dominant")) {
    cfg.k_list.clear();
    for (const json& jk : root["k_dominant"]) {
      if (jk.is_string() && (jk.get<std::string>() == "N" ||
                             jk.get<std::string>() == "n" ||
                             jk.get<std::string>() == "all"))
        cfg.k_list.push_back(std::nullopt);
      else if (jk.is_number_integer())
        cfg.k_list.push_back(jk.get<int>());
      else
        throw std::runtime_error(origin +
                                 ": k_dominant entries must be ints or \"N\"");
    }
  }
  if (root.contains("sim")) {
    const json& s = root["sim"];
    read_field(s, "slots", cfg.sim.total_slots, origin, "sim");
    read_field(s, "warmup", cfg.sim.warmup_slots, origin, "sim");
    if (s.contains("max_retransmits")) {
      const json& r = s["max_retransmits"];
      if (r.is_string() && (r.get<std::string>() == "inf" ||
                            r.get<std::string>() == "infinite"))
        cfg.sim.max_retransmits = std::nullopt;
      else if (r.is_number_unsigned())
        cfg.sim.max_retransmits = r.get<std::uint32_t>();
      else
        throw std::runtime_error(origin +
                                 ": sim.max_retransmits must be an int or \"inf\"");
    }
    read_field(s, "saturated_relays", cfg.sim.saturated_relays, origin, "sim");
    if (s.contains("relay_access")) {
      const std::string mode = s["relay_access"].get<std::string>();
      if (mode == "bernoulli")
        cfg.sim.relay_access.kind = RelayAccess::Kind::Bernoulli;
      else if (mode == "backoff")
        cfg.sim.relay_access.kind = RelayAccess::Kind::UniformBackoff;
      else
        throw std::runtime_error(origin + ": sim.relay_access must be " +
                                 "\"bernoulli\" or \"backoff\"");
    }
    read_field(s, "contention_window", cfg.sim.relay_access.contention_window,
               origin, "sim");
  }
  if (root.contains("sa")) {
    const json& s = root["sa"];
    read_field(s, "initial_temperature", cfg.sa.initial_temperature, origin, "sa");
    read_field(s, "cooling", cfg.sa.cooling, origin, "sa");
    read_field(s, "iters_per_temperature", cfg.sa.iters_per_temperature, origin,
               "sa");
    read_field(s, "min_temperature", cfg.sa.min_temperature, origin, "sa");
    read_field(s, "step_sigma", cfg.sa.step_sigma, origin, "sa");
    read_field(s, "restarts", cfg.sa.restarts, origin, "sa");
    read_field(s, "tolerance", cfg.sa.tolerance, origin, "sa");
    read_field(s, "penalty_weight", cfg.sa.penalty_weight, origin, "sa");
  }
  read_field(root, "replications", cfg.replications, origin, "experiment");
  read_field(root, "master_seed", cfg.master_seed, origin, "experiment");
  read_field(root, "workers", cfg.workers, origin, "experiment");
  read_field(root, "min_routed_flows", cfg.min_routed_flows, origin, "experiment");
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return experiment_config_from_json_text(buf.str(), path);
}

}  // namespace tofra
