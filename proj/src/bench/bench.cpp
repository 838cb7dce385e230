#include "agentgraph/bench/bench.hpp"

#include "agentgraph/errors.hpp"
#include "agentgraph/transfer/checkpoint.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace agentgraph {

DomainRegistry::DomainRegistry() = default;

std::string DomainRegistry::add_file(const std::string& path) {
  Domain d = load_domain(path);
  std::string name = d.name();
  loaded_.insert_or_assign(name, std::move(d));
  return name;
}

const Domain& DomainRegistry::get(const std::string& name) const {
  if (auto it = loaded_.find(name); it != loaded_.end()) return it->second;
  return builtin_domain(parse_domain(name));
}

std::vector<std::string> DomainRegistry::names() const {
  std::vector<std::string> out{"CR3", "SFR6", "LAP11"};
  for (const auto& [name, _] : loaded_) out.push_back(name);
  return out;
}

namespace {

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known, const std::string& where) {
  if (!j.is_object()) throw ConfigurationError(where + ": expected an object");
  for (const auto& [key, _] : j.items())
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
      throw ConfigurationError("unknown option '" + where + "." + key + "'");
}

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigurationError("option '" + where + "." + key + "' has the wrong type");
  }
}

}  // namespace

void apply_config(const nlohmann::json& j, TrainConfig& train, ModelOverrides& model) {
  reject_unknown(j, {"train", "gnn", "mlp"}, "config");
  if (j.contains("train")) {
    TrainConfig t = train;
    from_json(j["train"], t);
    t.validate();
    train = t;
  }
  if (j.contains("gnn")) {
    const auto& g = j["gnn"];
    reject_unknown(g, {"comm_steps", "s_hidden", "i_hidden", "s_comm", "i_comm", "use_bias"}, "gnn");
    maybe(g, "comm_steps", model.gnn.comm_steps, "gnn");
    maybe(g, "s_hidden", model.gnn.dims.s_hidden, "gnn");
    maybe(g, "i_hidden", model.gnn.dims.i_hidden, "gnn");
    maybe(g, "s_comm", model.gnn.dims.s_comm, "gnn");
    maybe(g, "i_comm", model.gnn.dims.i_comm, "gnn");
    maybe(g, "use_bias", model.gnn.use_bias, "gnn");
    model.gnn.validate();
  }
  if (j.contains("mlp")) {
    reject_unknown(j["mlp"], {"hidden1", "hidden2"}, "mlp");
    maybe(j["mlp"], "hidden1", model.mlp.hidden1, "mlp");
    maybe(j["mlp"], "hidden2", model.mlp.hidden2, "mlp");
  }
}

std::string RunCell::stem() const {
  return domain + "_env" + std::to_string(env) + "_" + std::string(to_string(model)) + "_seed" + std::to_string(seed);
}

std::vector<RunCell> enumerate_grid(const BenchOptions& o) {
  if (o.seed_last < o.seed_first) throw ConfigurationError("empty seed range");
  std::vector<RunCell> cells;
  for (const auto& d : o.domains)
    for (int e : o.envs)
      for (ModelKind m : o.models)
        for (int s = o.seed_first; s <= o.seed_last; ++s) cells.push_back({d, e, m, s + o.seed_offset});
  return cells;
}

std::pair<int, int> parse_seed_range(const std::string& text) {
  auto to_int = [&](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty() || v < 0)
      throw ConfigurationError("invalid seed range '" + text + "' (expected A..B or N with 0 <= A <= B)");
    return v;
  };
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const int v = to_int(text);
    return {v, v};
  }
  const int a = to_int(text.substr(0, dots)), b = to_int(text.substr(dots + 2));
  if (b < a) throw ConfigurationError("invalid seed range '" + text + "' (expected A..B or N with 0 <= A <= B)");
  return {a, b};
}

namespace {

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_curve_csv(const std::string& path, const std::vector<CurvePoint>& curve, const RunCell& cell) {
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot open " + path + " for writing");
  out << kCurveHeader << '\n';
  for (const auto& p : curve)
    out << p.dialogues << ',' << number(p.success_rate) << ',' << number(p.avg_reward) << ',' << to_string(cell.model)
        << ',' << cell.domain << ',' << cell.env << ',' << cell.seed << '\n';
  if (!out) throw CheckpointError("failed writing " + path);
}

std::vector<CurvePoint> run_cell(const RunCell& cell, const BenchOptions& o, const DomainRegistry& domains) {
  const Domain& domain = domains.get(cell.domain);
  const TaskConfig task = make_task(cell.env);
  GnnConfig base = o.model.gnn;
  MlpConfig mlp = o.model.mlp;
  std::optional<StoreSet> init;
  if (o.transfer_from) {
    // The source network's shape wins over --config; only the slot count follows the target domain.
    const Checkpoint ckpt = read_checkpoint(*o.transfer_from);
    base = ckpt.gnn;
    mlp = ckpt.mlp;
    Rng rng(static_cast<std::uint64_t>(cell.seed));
    auto imported = import_policy(ckpt, QNetwork(cell.model, gnn_config_for(domain, base), mlp), rng);
    for (const auto& w : imported.warnings) std::clog << cell.stem() << ": warning: " << w << '\n';
    init = std::move(imported.stores);
  }
  const QNetwork net(cell.model, gnn_config_for(domain, base), mlp);
  fs::create_directories(o.out_dir);
  const fs::path dir(o.out_dir);
  CheckpointCallback periodic;
  if (o.save_checkpoints)
    periodic = [&](int seen, const StoreSet& policy) {
      export_policy(net, policy, domain.name(), (dir / (cell.stem() + ".d" + std::to_string(seen) + ".ckpt.json")).string());
    };
  TrainingRun run = run_training(domain, task, cell.model, o.train, static_cast<std::uint64_t>(cell.seed),
                                 init ? &*init : nullptr, base, periodic, mlp);
  write_curve_csv((dir / (cell.stem() + ".csv")).string(), run.curve, cell);
  if (o.save_checkpoints) export_policy(net, run.policy, domain.name(), (dir / (cell.stem() + ".ckpt.json")).string());
  return run.curve;
}

namespace {

struct CsvRow {
  int dialogues;
  double success, reward;
  std::string model, domain;
  int env;
  std::string seed;
};

std::vector<CsvRow> read_curve(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line) || line != kCurveHeader) return {};
  std::vector<CsvRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 7) throw UsageError(path.string() + ":" + std::to_string(lineno) + ": expected 7 columns");
    try {
      rows.push_back({std::stoi(f[0]), std::stod(f[1]), std::stod(f[2]), f[3], f[4], std::stoi(f[5]), f[6]});
    } catch (const std::exception&) {
      throw UsageError(path.string() + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  return rows;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, std::sqrt(s / static_cast<double>(v.size()))};
}

}  // namespace

std::vector<SummaryRow> summarize(const std::string& run_dir, const std::vector<int>& marks) {
  if (!fs::is_directory(run_dir)) throw UsageError("run directory '" + run_dir + "' does not exist");
  // task key -> list of runs (each a full curve)
  std::map<std::tuple<std::string, int, std::string>, std::vector<std::vector<CsvRow>>> tasks;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(run_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv" && entry.path().filename() != "summary.csv")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto rows = read_curve(f);
    if (rows.empty()) continue;
    tasks[{rows[0].domain, rows[0].env, rows[0].model}].push_back(std::move(rows));
  }
  if (tasks.empty()) throw UsageError("no run CSVs found in '" + run_dir + "'");

  std::vector<SummaryRow> out;
  for (const auto& [key, runs] : tasks) {
    for (int mark : marks) {
      SummaryRow r;
      std::tie(r.domain, r.env, r.model) = key;
      r.mark = mark;
      std::vector<double> succ, rew;
      for (const auto& run : runs) {
        auto it = std::find_if(run.begin(), run.end(), [&](const CsvRow& c) { return c.dialogues == mark; });
        if (it == run.end()) {
          ++r.missing;
          continue;
        }
        succ.push_back(it->success);
        rew.push_back(it->reward);
      }
      r.runs = static_cast<int>(succ.size());
      std::tie(r.success_mean, r.success_std) = mean_std(succ);
      std::tie(r.reward_mean, r.reward_std) = mean_std(rew);
      out.push_back(r);
    }
  }
  return out;
}

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows) {
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot open " + path + " for writing");
  out << "domain,env,model,mark,runs,missing,success_mean,success_std,reward_mean,reward_std,incomplete\n";
  for (const auto& r : rows)
    out << r.domain << ',' << r.env << ',' << r.model << ',' << r.mark << ',' << r.runs << ',' << r.missing << ','
        << number(r.success_mean) << ',' << number(r.success_std) << ',' << number(r.reward_mean) << ','
        << number(r.reward_std) << ',' << (r.incomplete() ? "yes" : "no") << '\n';
}

void print_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << std::left << std::setw(8) << "domain" << std::setw(5) << "env" << std::setw(9) << "model" << std::right
      << std::setw(7) << "mark" << std::setw(6) << "runs" << std::setw(18) << "success %" << std::setw(16) << "reward"
      << '\n';
  for (const auto& r : rows) {
    std::ostringstream s, w;
    s << std::fixed << std::setprecision(1) << 100 * r.success_mean << " +- " << 100 * r.success_std;
    w << std::fixed << std::setprecision(2) << r.reward_mean << " +- " << r.reward_std;
    out << std::left << std::setw(8) << r.domain << std::setw(5) << r.env << std::setw(9) << r.model << std::right
        << std::setw(7) << r.mark << std::setw(6) << r.runs << std::setw(18) << s.str() << std::setw(16) << w.str();
    if (r.incomplete()) out << "  INCOMPLETE (" << r.missing << " run(s) stop early)";
    out << '\n';
  }
}

std::vector<SummaryRow> run_benchmark(const BenchOptions& o, const DomainRegistry& domains, std::ostream& log) {
  if (o.workers < 1) throw ConfigurationError("--workers must be >= 1");
  for (const auto& d : o.domains) domains.get(d);  // fail fast on unknown names
  const auto cells = enumerate_grid(o);
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < cells.size();) {
      {
        std::lock_guard lock(mu);
        if (failure) return;
        log << "[" << i + 1 << "/" << cells.size() << "] " << cells[i].stem() << std::endl;
      }
      try {
        const auto curve = run_cell(cells[i], o, domains);
        std::lock_guard lock(mu);
        log << "    done " << cells[i].stem() << ": final success " << curve.back().success_rate << std::endl;
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n = std::min<int>(o.workers, static_cast<int>(cells.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  auto rows = summarize(o.out_dir, o.marks);
  write_summary_csv((fs::path(o.out_dir) / "summary.csv").string(), rows);
  print_summary(log, rows);
  return rows;
}

}  // namespace agentgraph
