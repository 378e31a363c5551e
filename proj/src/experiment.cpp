#include "gcdl/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <system_error>
#include <vector>

#include "gcdl/idx.hpp"

namespace gcdl {
namespace {

struct KvItem {
  std::string key;
  std::string value;
  int line = 0;
};

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::string part =
        trim(comma == std::string::npos ? s.substr(start) : s.substr(start, comma - start));
    out.push_back(part);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<KvItem> parse_kv_text(const std::string& text) {
  std::vector<KvItem> items;
  std::map<std::string, int> seen;
  int line = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string raw = nl == std::string::npos ? text.substr(pos) : text.substr(pos, nl - pos);
    ++line;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    raw = trim(raw);
    if (!raw.empty()) {
      const std::size_t eq = raw.find('=');
      if (eq == std::string::npos) throw ParseError("expected 'key = value'", line);
      KvItem item;
      item.key = trim(raw.substr(0, eq));
      item.value = trim(raw.substr(eq + 1));
      item.line = line;
      if (item.key.empty()) throw ParseError("empty key", line);
      if (item.value.empty()) throw ParseError("empty value for key '" + item.key + "'", line);
      if (seen.count(item.key)) throw ParseError("duplicate key '" + item.key + "'", line);
      seen[item.key] = line;
      items.push_back(std::move(item));
    }
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  return items;
}

double to_double(const KvItem& item) {
  double v = 0.0;
  const char* begin = item.value.data();
  const char* end = begin + item.value.size();
  auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ParseError("invalid number for key '" + item.key + "'", item.line);
  }
  return v;
}

std::uint64_t to_u64(const KvItem& item) {
  std::uint64_t v = 0;
  const char* begin = item.value.data();
  const char* end = begin + item.value.size();
  auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ParseError("invalid nonnegative integer for key '" + item.key + "'", item.line);
  }
  return v;
}

int to_int(const KvItem& item) {
  int v = 0;
  const char* begin = item.value.data();
  const char* end = begin + item.value.size();
  auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ParseError("invalid integer for key '" + item.key + "'", item.line);
  }
  return v;
}

bool to_bool(const KvItem& item) {
  if (item.value == "true" || item.value == "1") return true;
  if (item.value == "false" || item.value == "0") return false;
  throw ParseError("invalid boolean for key '" + item.key + "'", item.line);
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "preset",      "dataset",     "methods",   "seeds",       "iterations",
      "n",           "p",           "d",         "zeta",        "schedule",
      "lambda",      "gamma",       "smoothness", "gamma0",     "m",
      "feature_dim", "feature_std", "noise_std", "data_seed",   "images",
      "labels",      "class_a",     "class_b",   "subset_m",    "out",
      "checkpoints", "allow_divergence"};
  return keys;
}

struct Kv {
  std::map<std::string, KvItem> items;

  const KvItem* find(const std::string& key) const {
    auto it = items.find(key);
    return it == items.end() ? nullptr : &it->second;
  }
};

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += ", ";
    out += parts[i];
  }
  return out;
}

std::string trace_path(const std::string& prefix, Method method, std::uint64_t seed) {
  return prefix + "-" + method_name(method) + "-seed" + std::to_string(seed) + ".csv";
}

void ensure_parent_dir(const std::string& path) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

std::ofstream open_out(const std::string& path) {
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

void write_trace_csv(const std::string& path, Method method, std::uint64_t seed,
                     const std::vector<TraceRow>& trace) {
  std::ofstream out = open_out(path);
  out << "method,seed,t,cumulative_bits,loss,sqrt_two_loss,param_error,grad_norm_sq\n";
  for (const TraceRow& row : trace) {
    out << method_name(method) << ',' << seed << ',' << row.t << ','
        << row.cumulative_bits << ',' << format_double(row.loss) << ','
        << format_double(row.sqrt_two_loss) << ',';
    if (row.param_error) out << format_double(*row.param_error);
    out << ',' << format_double(row.grad_norm_sq) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace

std::string format_double(double value) {
  char buf[48];
  auto res = std::to_chars(buf, buf + sizeof(buf), value,
                           std::chars_format::scientific, 16);
  return std::string(buf, res.ptr);
}

const char* preset_text(const std::string& name) {
  if (name == "sec5a") {
    return "dataset = synthetic-regression\n"
           "methods = onebit-gc, sgc, ignore-stragglers-1bit\n"
           "seeds = 1, 2, 3, 4, 5\n"
           "iterations = 10000\n"
           "n = 100\n"
           "p = 0.1\n"
           "d = 20\n"
           "m = 1000\n"
           "feature_dim = 100\n"
           "feature_std = 10\n"
           "noise_std = 1\n"
           "schedule = inverse-t\n"
           "lambda = 100000\n"
           "zeta = 64\n";
  }
  if (name == "rosenbrock") {
    return "dataset = rosenbrock\n"
           "methods = onebit-gc, sgc, ignore-stragglers-1bit\n"
           "seeds = 1, 2, 3\n"
           "iterations = 20000\n"
           "n = 100\n"
           "p = 0.1\n"
           "d = 10\n"
           "m = 100\n"
           "schedule = fixed\n"
           "gamma = 1e-5\n"
           "zeta = 64\n"
           "allow_divergence = true\n";
  }
  if (name == "sec5c-mnist") {
    return "dataset = idx-files\n"
           "methods = onebit-gc, sgc, ignore-stragglers-1bit\n"
           "seeds = 1, 2, 3, 4, 5\n"
           "iterations = 2000\n"
           "n = 10\n"
           "p = 0.1\n"
           "d = 2\n"
           "class_a = 0\n"
           "class_b = 2\n"
           "subset_m = 100\n"
           "schedule = inverse-t\n"
           "lambda = 1000\n"
           "zeta = 64\n";
  }
  if (name == "sec5c-fashion") {
    return "dataset = idx-files\n"
           "methods = onebit-gc, sgc, ignore-stragglers-1bit\n"
           "seeds = 1, 2, 3, 4, 5\n"
           "iterations = 2000\n"
           "n = 10\n"
           "p = 0.1\n"
           "d = 2\n"
           "class_a = 0\n"
           "class_b = 1\n"
           "subset_m = 100\n"
           "schedule = inverse-t\n"
           "lambda = 1000\n"
           "zeta = 64\n";
  }
  return nullptr;
}

std::vector<std::string> preset_names() {
  return {"sec5a", "rosenbrock", "sec5c-mnist", "sec5c-fashion"};
}

std::vector<int> expand_degrees(const std::vector<int>& d, std::size_t m) {
  if (d.size() == 1) return std::vector<int>(m, d[0]);
  if (d.size() == 2) {
    std::vector<int> out(m, d[1]);
    for (std::size_t i = 0; i < m / 2; ++i) out[i] = d[0];
    return out;
  }
  throw std::invalid_argument("d must hold one or two values");
}

ExperimentConfig parse_config(const std::string& text) {
  const std::vector<KvItem> user = parse_kv_text(text);
  for (const KvItem& item : user) {
    if (!known_keys().count(item.key)) {
      throw ParseError("unknown key '" + item.key + "'", item.line);
    }
  }

  Kv kv;
  std::string preset_name;
  for (const KvItem& item : user) {
    if (item.key == "preset") {
      preset_name = item.value;
      const char* body = preset_text(preset_name);
      if (body == nullptr) throw ParseError("unknown preset '" + preset_name + "'", item.line);
      for (KvItem& preset_item : parse_kv_text(body)) {
        preset_item.line = 0;
        kv.items[preset_item.key] = preset_item;
      }
    }
  }
  for (const KvItem& item : user) {
    if (item.key != "preset") kv.items[item.key] = item;
  }

  ExperimentConfig config;
  config.preset = preset_name;

  std::vector<std::string> missing;
  auto require = [&](const char* key) -> const KvItem* {
    const KvItem* item = kv.find(key);
    if (item == nullptr) missing.push_back(key);
    return item;
  };

  const KvItem* dataset = require("dataset");
  const KvItem* methods = require("methods");
  const KvItem* seeds = require("seeds");
  const KvItem* iterations = require("iterations");
  const KvItem* n = require("n");
  const KvItem* p = require("p");
  const KvItem* d = require("d");
  const KvItem* schedule = require("schedule");

  if (dataset != nullptr) {
    if (dataset->value == "synthetic-regression") {
      config.source = DatasetSource::kSyntheticRegression;
      require("m");
      require("feature_dim");
    } else if (dataset->value == "rosenbrock") {
      config.source = DatasetSource::kRosenbrock;
      require("m");
    } else if (dataset->value == "idx-files") {
      config.source = DatasetSource::kIdxFiles;
      require("images");
      require("labels");
      require("class_a");
      require("class_b");
      require("subset_m");
    } else {
      throw ParseError("unknown dataset '" + dataset->value + "'", dataset->line);
    }
  }
  if (schedule != nullptr) {
    if (schedule->value == "inverse-t") {
      require("lambda");
    } else if (schedule->value == "fixed") {
      require("gamma");
    } else if (schedule->value == "constant") {
      require("smoothness");
    } else if (schedule->value == "decaying") {
      require("smoothness");
      require("gamma0");
    } else {
      throw ParseError("unknown schedule '" + schedule->value + "'", schedule->line);
    }
  }
  if (!missing.empty()) {
    throw ParseError("missing required keys: " + join(missing), 0);
  }

  for (const std::string& part : split_list(methods->value)) {
    const std::optional<Method> method = method_from_name(part);
    if (!method) throw ParseError("unknown method '" + part + "'", methods->line);
    for (Method existing : config.methods) {
      if (existing == *method) throw ParseError("duplicate method '" + part + "'", methods->line);
    }
    config.methods.push_back(*method);
  }
  if (config.methods.empty()) throw ParseError("methods list is empty", methods->line);

  for (const std::string& part : split_list(seeds->value)) {
    KvItem tmp{"seeds", part, seeds->line};
    const std::uint64_t seed = to_u64(tmp);
    for (std::uint64_t existing : config.seeds) {
      if (existing == seed) throw ParseError("duplicate seed '" + part + "'", seeds->line);
    }
    config.seeds.push_back(seed);
  }
  if (config.seeds.empty()) throw ParseError("seeds list is empty", seeds->line);

  config.iterations = to_u64(*iterations);
  config.n = static_cast<std::size_t>(to_u64(*n));
  if (config.n < 1) throw ParseError("n must be at least 1", n->line);
  config.p = to_double(*p);
  if (config.p < 0.0 || config.p >= 1.0) throw ParseError("p must be in [0, 1)", p->line);

  for (const std::string& part : split_list(d->value)) {
    KvItem tmp{"d", part, d->line};
    config.d.push_back(to_int(tmp));
  }
  if (config.d.empty() || config.d.size() > 2) {
    throw ParseError("d must hold one or two values", d->line);
  }
  for (int degree : config.d) {
    if (degree < 1 || static_cast<std::size_t>(degree) > config.n) {
      throw ParseError("d values must lie in [1, n]", d->line);
    }
  }

  if (const KvItem* item = kv.find("zeta")) {
    config.zeta = static_cast<std::size_t>(to_u64(*item));
    if (config.zeta < 1) throw ParseError("zeta must be at least 1", item->line);
  }

  if (schedule->value == "inverse-t") {
    const KvItem* lambda = kv.find("lambda");
    const double value = to_double(*lambda);
    if (value <= 0.0) throw ParseError("lambda must be positive", lambda->line);
    config.schedule = LearningRateSchedule::inverse_lambda_t(value);
  } else if (schedule->value == "fixed") {
    const KvItem* gamma = kv.find("gamma");
    const double value = to_double(*gamma);
    if (value < 0.0) throw ParseError("gamma must be nonnegative", gamma->line);
    config.schedule = LearningRateSchedule::fixed(value);
  } else if (schedule->value == "constant") {
    const KvItem* smoothness = kv.find("smoothness");
    const double value = to_double(*smoothness);
    if (value <= 0.0) throw ParseError("smoothness must be positive", smoothness->line);
    config.schedule = LearningRateSchedule::constant_for(value, config.iterations);
    try {
      learning_rate(config.schedule, 0);
    } catch (const std::invalid_argument& err) {
      throw ParseError(err.what(), schedule->line);
    }
  } else {
    const KvItem* smoothness = kv.find("smoothness");
    const KvItem* gamma0 = kv.find("gamma0");
    const double s_value = to_double(*smoothness);
    const double g_value = to_double(*gamma0);
    if (s_value <= 0.0) throw ParseError("smoothness must be positive", smoothness->line);
    if (g_value <= 0.0 || g_value >= 0.5 / s_value) {
      throw ParseError("gamma0 must satisfy 0 < gamma0 < 1/(2*smoothness)", gamma0->line);
    }
    config.schedule = LearningRateSchedule::decaying(s_value, g_value);
  }

  if (config.source == DatasetSource::kSyntheticRegression ||
      config.source == DatasetSource::kRosenbrock) {
    const KvItem* m = kv.find("m");
    config.m = static_cast<std::size_t>(to_u64(*m));
    if (config.m < 1) throw ParseError("m must be at least 1", m->line);
  }
  if (config.source == DatasetSource::kSyntheticRegression) {
    const KvItem* feature_dim = kv.find("feature_dim");
    config.feature_dim = static_cast<std::size_t>(to_u64(*feature_dim));
    if (config.feature_dim < 1) {
      throw ParseError("feature_dim must be at least 1", feature_dim->line);
    }
    if (const KvItem* item = kv.find("feature_std")) {
      config.feature_std = to_double(*item);
      if (config.feature_std < 0.0) throw ParseError("feature_std must be nonnegative", item->line);
    }
    if (const KvItem* item = kv.find("noise_std")) {
      config.noise_std = to_double(*item);
      if (config.noise_std < 0.0) throw ParseError("noise_std must be nonnegative", item->line);
    }
  }
  if (config.source == DatasetSource::kIdxFiles) {
    config.images_path = kv.find("images")->value;
    config.labels_path = kv.find("labels")->value;
    const KvItem* class_a = kv.find("class_a");
    const KvItem* class_b = kv.find("class_b");
    config.class_a = to_int(*class_a);
    config.class_b = to_int(*class_b);
    if (config.class_a < 0 || config.class_a > 255) {
      throw ParseError("class_a must be a byte value", class_a->line);
    }
    if (config.class_b < 0 || config.class_b > 255) {
      throw ParseError("class_b must be a byte value", class_b->line);
    }
    if (config.class_a == config.class_b) {
      throw ParseError("class_a and class_b must differ", class_b->line);
    }
    const KvItem* subset = kv.find("subset_m");
    config.subset_m = static_cast<std::size_t>(to_u64(*subset));
    if (config.subset_m < 1) throw ParseError("subset_m must be at least 1", subset->line);
  }

  if (const KvItem* item = kv.find("data_seed")) config.data_seed = to_u64(*item);
  if (const KvItem* item = kv.find("out")) config.out_prefix = item->value;
  if (const KvItem* item = kv.find("checkpoints")) {
    config.checkpoints = static_cast<std::size_t>(to_u64(*item));
    if (config.checkpoints < 1) throw ParseError("checkpoints must be at least 1", item->line);
  }
  if (const KvItem* item = kv.find("allow_divergence")) {
    config.allow_divergence = to_bool(*item);
  }
  return config;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open config file: " + path, 0);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  Dataset data;
  Vector beta_star;
  bool have_star = false;
  LossModel model;

  switch (config.source) {
    case DatasetSource::kSyntheticRegression: {
      RegressionData rd = generate_regression_data(
          config.m, config.feature_dim, config.feature_std, config.noise_std,
          config.data_seed);
      data = std::move(rd.dataset);
      beta_star = std::move(rd.beta_star);
      have_star = true;
      model = LossModel{LossKind::kLinearRegression, config.feature_dim};
      break;
    }
    case DatasetSource::kRosenbrock: {
      data.samples.resize(config.m);
      for (std::size_t i = 0; i < config.m; ++i) data.samples[i].index = i;
      model = LossModel{LossKind::kRosenbrock, config.m + 1};
      break;
    }
    case DatasetSource::kIdxFiles: {
      data = load_idx_subset(config.images_path, config.labels_path,
                             config.class_a, config.class_b, config.subset_m,
                             config.data_seed);
      model = LossModel{LossKind::kLogistic, data.feature_dim()};
      break;
    }
  }

  const std::size_t m = data.size();
  const std::vector<int> base_d = expand_degrees(config.d, m);

  ExperimentResult result;
  std::vector<RunResult> outcomes;

  for (Method method : config.methods) {
    RedundancySpec spec;
    spec.d = method == Method::kIgnoreStragglers1Bit ? std::vector<int>(m, 1) : base_d;
    for (std::uint64_t seed : config.seeds) {
      SimConfig sim;
      sim.method = method;
      sim.model = model;
      sim.dataset = &data;
      sim.spec = spec;
      sim.n = config.n;
      sim.p = config.p;
      sim.schedule = config.schedule;
      sim.iterations = config.iterations;
      sim.seed = seed;
      sim.budget = BitBudget{model.w, config.zeta};
      if (have_star) sim.beta_star = &beta_star;

      RunResult outcome = run(sim);

      RunRecord record;
      record.method = method;
      record.seed = seed;
      record.diverged = outcome.diverged;
      record.diverged_at = outcome.diverged_at;
      record.rows = outcome.trace.size();
      record.bits_per_iteration = payload_bits(method, sim.budget);
      record.final_bits = outcome.trace.back().cumulative_bits;
      record.initial_loss = outcome.trace.front().loss;
      record.final_loss = outcome.trace.back().loss;
      record.final_param_error = outcome.trace.back().param_error;
      record.trace_path = trace_path(config.out_prefix, method, seed);
      write_trace_csv(record.trace_path, method, seed, outcome.trace);

      result.any_divergence = result.any_divergence || outcome.diverged;
      result.runs.push_back(std::move(record));
      outcomes.push_back(std::move(outcome));
    }
  }

  // Cross-seed summary on shared cumulative-bit checkpoints. The grid stops
  // at the smallest final overhead among completed runs, so the step-function
  // lookup never extrapolates.
  std::uint64_t psi_common = 0;
  bool any_complete = false;
  for (std::size_t r = 0; r < result.runs.size(); ++r) {
    if (result.runs[r].diverged) continue;
    if (!any_complete || result.runs[r].final_bits < psi_common) {
      psi_common = result.runs[r].final_bits;
    }
    any_complete = true;
  }

  if (any_complete && psi_common > 0) {
    for (Method method : config.methods) {
      std::vector<std::size_t> members;
      for (std::size_t r = 0; r < result.runs.size(); ++r) {
        if (result.runs[r].method == method && !result.runs[r].diverged) {
          members.push_back(r);
        }
      }
      if (members.empty()) continue;
      std::uint64_t prev = 0;
      for (std::size_t k = 1; k <= config.checkpoints; ++k) {
        const std::uint64_t c = psi_common / config.checkpoints * k +
                                (psi_common % config.checkpoints) * k / config.checkpoints;
        if (c == prev) continue;
        prev = c;
        SummaryRow row;
        row.method = method;
        row.cumulative_bits = c;
        bool all_have_param = true;
        for (std::size_t r : members) {
          const std::uint64_t rho = result.runs[r].bits_per_iteration;
          const std::uint64_t t = c / rho;
          const TraceRow& tr = outcomes[r].trace.at(t);
          row.mean_loss += tr.loss;
          row.mean_sqrt_two_loss += tr.sqrt_two_loss;
          row.mean_grad_norm_sq += tr.grad_norm_sq;
          if (tr.param_error) {
            row.mean_param_error = row.mean_param_error.value_or(0.0) + *tr.param_error;
          } else {
            all_have_param = false;
          }
        }
        const double count = static_cast<double>(members.size());
        row.mean_loss /= count;
        row.mean_sqrt_two_loss /= count;
        row.mean_grad_norm_sq /= count;
        if (all_have_param && row.mean_param_error) {
          row.mean_param_error = *row.mean_param_error / count;
        } else {
          row.mean_param_error.reset();
        }
        result.summary.push_back(row);
      }
    }
  }

  result.summary_path = config.out_prefix + "-summary.csv";
  {
    std::ofstream out = open_out(result.summary_path);
    out << "method,cumulative_bits,mean_loss,mean_sqrt_two_loss,mean_param_error,"
           "mean_grad_norm_sq\n";
    for (const SummaryRow& row : result.summary) {
      out << method_name(row.method) << ',' << row.cumulative_bits << ','
          << format_double(row.mean_loss) << ',' << format_double(row.mean_sqrt_two_loss)
          << ',';
      if (row.mean_param_error) out << format_double(*row.mean_param_error);
      out << ',' << format_double(row.mean_grad_norm_sq) << '\n';
    }
    if (!out) throw std::runtime_error("failed writing " + result.summary_path);
  }

  result.runs_path = config.out_prefix + "-runs.csv";
  {
    std::ofstream out = open_out(result.runs_path);
    out << "method,seed,status,rows,bits_per_iteration,final_cumulative_bits,final_loss\n";
    for (const RunRecord& record : result.runs) {
      out << method_name(record.method) << ',' << record.seed << ','
          << (record.diverged ? "diverged" : "ok") << ',' << record.rows << ','
          << record.bits_per_iteration << ',' << record.final_bits << ','
          << format_double(record.final_loss) << '\n';
    }
    if (!out) throw std::runtime_error("failed writing " + result.runs_path);
  }
  return result;
}

BoundsConfig parse_bounds_config(const std::string& text) {
  static const std::set<std::string> keys = {"C",      "lambda", "smoothness",
                                             "m",      "n",      "w",
                                             "p",      "D",      "gamma0",
                                             "loss0",  "loss_star", "T",
                                             "d",      "out"};
  const std::vector<KvItem> items = parse_kv_text(text);
  Kv kv;
  for (const KvItem& item : items) {
    if (!keys.count(item.key)) throw ParseError("unknown key '" + item.key + "'", item.line);
    kv.items[item.key] = item;
  }

  std::vector<std::string> missing;
  auto require = [&](const char* key) -> const KvItem* {
    const KvItem* item = kv.find(key);
    if (item == nullptr) missing.push_back(key);
    return item;
  };
  const KvItem* c = require("C");
  const KvItem* lambda = require("lambda");
  const KvItem* smoothness = require("smoothness");
  const KvItem* m = require("m");
  const KvItem* n = require("n");
  const KvItem* w = require("w");
  const KvItem* p = require("p");
  const KvItem* big_d = require("D");
  const KvItem* gamma0 = require("gamma0");
  const KvItem* loss0 = require("loss0");
  const KvItem* loss_star = require("loss_star");
  const KvItem* horizons = require("T");
  if (!missing.empty()) throw ParseError("missing required keys: " + join(missing), 0);

  BoundsConfig config;
  config.params.C = to_double(*c);
  if (config.params.C <= 0.0) throw ParseError("C must be positive", c->line);
  config.params.lambda = to_double(*lambda);
  if (config.params.lambda <= 0.0) throw ParseError("lambda must be positive", lambda->line);
  config.params.S = to_double(*smoothness);
  if (config.params.S <= 0.0) throw ParseError("smoothness must be positive", smoothness->line);
  config.params.m = to_double(*m);
  config.params.n = to_double(*n);
  config.params.w = to_double(*w);
  if (config.params.m < 1.0 || config.params.n < 1.0 || config.params.w < 1.0) {
    throw ParseError("m, n and w must be at least 1", m->line);
  }
  config.params.p = to_double(*p);
  if (config.params.p < 0.0 || config.params.p >= 1.0) {
    throw ParseError("p must be in [0, 1)", p->line);
  }
  config.params.D = to_double(*big_d);
  if (config.params.D < 1.0) throw ParseError("D must be at least 1", big_d->line);
  config.params.gamma0 = to_double(*gamma0);
  if (config.params.gamma0 <= 0.0 ||
      config.params.gamma0 >= 0.5 / config.params.S) {
    throw ParseError("gamma0 must satisfy 0 < gamma0 < 1/(2*smoothness)", gamma0->line);
  }
  config.params.loss0 = to_double(*loss0);
  config.params.loss_star = to_double(*loss_star);

  for (const std::string& part : split_list(horizons->value)) {
    KvItem tmp{"T", part, horizons->line};
    const std::uint64_t value = to_u64(tmp);
    if (value < 1) throw ParseError("T values must be at least 1", horizons->line);
    config.horizons.push_back(value);
  }
  if (config.horizons.empty()) throw ParseError("T list is empty", horizons->line);

  const std::size_t count = static_cast<std::size_t>(config.params.m);
  if (const KvItem* item = kv.find("d")) {
    for (const std::string& part : split_list(item->value)) {
      KvItem tmp{"d", part, item->line};
      config.d.d.push_back(to_int(tmp));
    }
    try {
      config.d.d = expand_degrees(config.d.d, count);
    } catch (const std::invalid_argument& err) {
      throw ParseError(err.what(), item->line);
    }
    for (int degree : config.d.d) {
      if (degree < 1 || static_cast<double>(degree) > config.params.n) {
        throw ParseError("d values must lie in [1, n]", item->line);
      }
    }
  } else {
    const double rounded = std::floor(config.params.D + 0.5);
    if (rounded != config.params.D) {
      throw ParseError("D must be an integer when d is not given", big_d->line);
    }
    config.d = RedundancySpec::homogeneous(count, static_cast<int>(rounded));
  }

  if (const KvItem* item = kv.find("out")) config.out_prefix = item->value;
  return config;
}

std::string write_bounds_csv(const BoundsConfig& config) {
  const std::string path = config.out_prefix + "-bounds.csv";
  std::ofstream out = open_out(path);
  out << "C,lambda,smoothness,m,n,w,p,D,gamma0,loss0,loss_star,T,"
         "second_moment,theorem1,theorem2,theorem3\n";
  const TheoryParams& tp = config.params;
  for (std::uint64_t horizon : config.horizons) {
    out << format_double(tp.C) << ',' << format_double(tp.lambda) << ','
        << format_double(tp.S) << ',' << format_double(tp.m) << ','
        << format_double(tp.n) << ',' << format_double(tp.w) << ','
        << format_double(tp.p) << ',' << format_double(tp.D) << ','
        << format_double(tp.gamma0) << ',' << format_double(tp.loss0) << ','
        << format_double(tp.loss_star) << ',' << horizon << ','
        << format_double(bound_second_moment(tp, config.d)) << ','
        << format_double(bound_theorem1(tp, config.d, horizon)) << ','
        << format_double(bound_theorem2(tp, horizon)) << ','
        << format_double(bound_theorem3(tp, horizon)) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path);
  return path;
}

}  // namespace gcdl
