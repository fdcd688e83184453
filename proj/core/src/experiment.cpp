#include "crossrec/experiment.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>
#include <tuple>

#include "json.hpp"

#include "crossrec/checkpoint.hpp"

namespace crossrec {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

void ExperimentConfig::validate() const {
  if (source_path.empty() || target_path.empty())
    throw std::invalid_argument("config: source and target paths are required");
  if (repeats < 1) throw std::invalid_argument("config: repeats must be >= 1");
  if (gamma_min <= 0.0 || gamma_max < gamma_min)
    throw std::invalid_argument("config: need 0 < gamma_min <= gamma_max");
  model_kind_from_string(model);
  train.validate();
  if (protocol.K < 0.0 || protocol.K >= 100.0)
    throw std::invalid_argument("config: protocol.K must be in [0,100)");
}

std::vector<std::string> valid_config_keys() {
  return {"source",        "target",        "gamma_min",     "gamma_max",
          "min_ratings",   "model",         "protocol.kind", "protocol.K",
          "out",           "repeats",       "seed",          "train.k",
          "train.alpha",   "train.lr",      "train.batch",   "train.dropout",
          "train.epochs",  "train.patience","train.lambda",  "train.rho",
          "train.eps",     "train.L",       "train.optimizer",
          "train.scale_input"};
}

namespace {

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: invalid number for " + key + ": " + v);
  }
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  const double d = parse_real(key, v);
  if (d < 0 || d != std::floor(d))
    throw std::invalid_argument("config: " + key + " must be a non-negative integer");
  return static_cast<std::uint64_t>(d);
}

}  // namespace

void apply_config_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "source") cfg.source_path = value;
  else if (key == "target") cfg.target_path = value;
  else if (key == "gamma_min") cfg.gamma_min = parse_real(key, value);
  else if (key == "gamma_max") cfg.gamma_max = parse_real(key, value);
  else if (key == "min_ratings") cfg.min_ratings = parse_uint(key, value);
  else if (key == "model") cfg.model = value;
  else if (key == "protocol.kind") cfg.protocol.kind = protocol_kind_from_string(value);
  else if (key == "protocol.K") cfg.protocol.K = parse_real(key, value);
  else if (key == "out") cfg.out_dir = value;
  else if (key == "repeats") cfg.repeats = parse_uint(key, value);
  else if (key == "seed") cfg.base_seed = parse_uint(key, value);
  else if (key == "train.k") cfg.train.k = parse_uint(key, value);
  else if (key == "train.alpha") cfg.train.alpha = parse_real(key, value);
  else if (key == "train.lr") cfg.train.lr = parse_real(key, value);
  else if (key == "train.batch") cfg.train.batch_size = parse_uint(key, value);
  else if (key == "train.dropout") cfg.train.dropout = parse_real(key, value);
  else if (key == "train.epochs") cfg.train.max_epochs = parse_uint(key, value);
  else if (key == "train.patience") cfg.train.patience = parse_uint(key, value);
  else if (key == "train.lambda") cfg.train.lambda = parse_real(key, value);
  else if (key == "train.rho") cfg.train.rho = parse_real(key, value);
  else if (key == "train.eps") cfg.train.eps = parse_real(key, value);
  else if (key == "train.L") cfg.train.L = parse_uint(key, value);
  else if (key == "train.optimizer") {
    if (value == "rmsprop") cfg.train.optimizer = OptimizerKind::RmsProp;
    else if (value == "sgd") cfg.train.optimizer = OptimizerKind::Sgd;
    else throw std::invalid_argument("config: train.optimizer must be rmsprop or sgd");
  } else if (key == "train.scale_input") {
    cfg.train.scale_encoder_input = value == "true" || value == "1";
  } else {
    std::string keys;
    for (const auto& k : valid_config_keys()) keys += k + " ";
    throw std::invalid_argument("config: unknown key '" + key + "'; valid keys: " + keys);
  }
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  json j;
  in >> j;
  ExperimentConfig cfg;
  // iterate in sorted key order for reproducible error behavior
  std::map<std::string, json> items;
  for (auto& [k, v] : j.items()) items[k] = v;
  for (const auto& [k, v] : items)
    apply_config_key(cfg, k, v.is_string() ? v.get<std::string>() : v.dump());
  return cfg;
}

std::string config_to_json_string(const ExperimentConfig& cfg) {
  json j;
  j["source"] = cfg.source_path;
  j["target"] = cfg.target_path;
  j["gamma_min"] = cfg.gamma_min;
  j["gamma_max"] = cfg.gamma_max;
  j["min_ratings"] = cfg.min_ratings;
  j["model"] = cfg.model;
  j["protocol.kind"] = to_string(cfg.protocol.kind);
  j["protocol.K"] = cfg.protocol.K;
  j["out"] = cfg.out_dir;
  j["repeats"] = cfg.repeats;
  j["seed"] = cfg.base_seed;
  j["train.k"] = cfg.train.k;
  j["train.alpha"] = cfg.train.alpha;
  j["train.lr"] = cfg.train.lr;
  j["train.batch"] = cfg.train.batch_size;
  j["train.dropout"] = cfg.train.dropout;
  j["train.epochs"] = cfg.train.max_epochs;
  j["train.patience"] = cfg.train.patience;
  j["train.lambda"] = cfg.train.lambda;
  j["train.rho"] = cfg.train.rho;
  j["train.eps"] = cfg.train.eps;
  j["train.L"] = cfg.train.L;
  j["train.optimizer"] = cfg.train.optimizer == OptimizerKind::RmsProp ? "rmsprop" : "sgd";
  j["train.scale_input"] = cfg.train.scale_encoder_input;
  return j.dump();
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string s = config_to_json_string(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

struct RunRecord {
  std::uint64_t seed;
  EvalResult eval;
  double best_val_mae;
  bool ok = false;
};

void write_trainlog(const TrainResult& tr, const std::string& path) {
  std::ofstream out(path);
  out << "epoch,loss,val_mae\n";
  for (const auto& e : tr.log)
    out << e.epoch << "," << format_double(e.loss) << "," << format_double(e.val_mae) << "\n";
}

void write_report(const ExperimentConfig& cfg, std::uint64_t seed, const EvalResult& ev,
                  const TrainResult& tr, const std::string& path) {
  json j;
  j["config_hash"] = config_hash(cfg);
  j["model"] = cfg.model;
  j["protocol"] = to_string(cfg.protocol.kind);
  j["K"] = cfg.protocol.K;
  j["seed"] = seed;
  j["mae"] = ev.mae;
  j["rmse"] = ev.rmse;
  j["count"] = ev.count;
  j["cold_user_count"] = ev.cold_user_count;
  j["empty"] = ev.empty;
  j["best_epoch"] = tr.best_epoch;
  j["best_val_mae"] = tr.best_val_mae;
  j["stop_reason"] = tr.stop_reason;
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  {  // echo the effective config for provenance
    std::ofstream out(fs::path(cfg.out_dir) / "config.json");
    out << config_to_json_string(cfg) << "\n";
  }

  const RatingsDataset src = load_ratings(cfg.source_path, cfg.gamma_min, cfg.gamma_max);
  const RatingsDataset tgt = load_ratings(cfg.target_path, cfg.gamma_min, cfg.gamma_max);
  const CrossDomainDataset aligned = align_domains(src, tgt, cfg.min_ratings);

  const std::string hash = config_hash(cfg);
  std::vector<RunRecord> runs;
  bool all_ok = true;
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    const std::uint64_t seed = cfg.base_seed + r;
    RunRecord rec;
    rec.seed = seed;
    const fs::path run_dir = fs::path(cfg.out_dir) / ("run_seed" + std::to_string(seed));
    try {
      fs::create_directories(run_dir);
      CrossDomainDataset ds = aligned;
      split(ds, SplitFractions{}, seed);
      ProtocolSpec proto = cfg.protocol;
      proto.seed = seed;
      apply_protocol(ds, proto);
      save_manifest(ds, (run_dir / "protocol_manifest.json").string());

      TrainConfig tc = cfg.train;
      tc.seed = seed;
      const TrainResult tr = train(model_kind_from_string(cfg.model), ds, tc);
      save_checkpoint(tr.model, tc, (run_dir / "checkpoint.json").string());
      write_trainlog(tr, (run_dir / "trainlog.csv").string());

      rec.eval = evaluate(tr.model, ds, proto);
      rec.best_val_mae = tr.best_val_mae;
      write_report(cfg, seed, rec.eval, tr, (run_dir / "report.json").string());
      rec.ok = true;
    } catch (const std::exception& e) {
      std::cerr << "run seed " << seed << " failed: " << e.what() << "\n";
      all_ok = false;
    }
    runs.push_back(rec);
  }

  // summary.csv: one row per seed plus the mean +/- std aggregate row
  std::vector<EvalResult> ok_evals;
  std::ofstream out(fs::path(cfg.out_dir) / "summary.csv");
  out << "protocol,K,model,seed,mae,rmse,std_mae,std_rmse,config_hash\n";
  const std::string prefix =
      to_string(cfg.protocol.kind) + "," + format_double(cfg.protocol.K) + "," + cfg.model + ",";
  for (const auto& rec : runs) {
    if (!rec.ok || rec.eval.empty) continue;
    ok_evals.push_back(rec.eval);
    out << prefix << rec.seed << "," << format_double(rec.eval.mae) << ","
        << format_double(rec.eval.rmse) << ",,," << hash << "\n";
  }
  const EvalReport rep = aggregate(cfg.protocol, ok_evals);
  out << prefix << "mean," << format_double(rep.mean_mae) << "," << format_double(rep.mean_rmse)
      << "," << format_double(rep.std_mae) << "," << format_double(rep.std_rmse) << "," << hash
      << "\n";
  return all_ok ? 0 : 1;
}

int run_sweep(const ExperimentConfig& cfg, const std::vector<double>& alphas,
              const std::vector<std::size_t>& ks) {
  cfg.validate();
  if (alphas.empty() || ks.empty()) throw std::invalid_argument("sweep: empty grid");
  fs::create_directories(cfg.out_dir);

  struct Row {
    double alpha;
    std::size_t k;
    double mean_val_mae;
    double mean_mae;
    double mean_rmse;
    bool ok;
  };
  std::vector<Row> rows;
  int status = 0;
  for (double alpha : alphas) {
    for (std::size_t k : ks) {
      ExperimentConfig sub = cfg;
      sub.train.alpha = alpha;
      sub.train.k = k;
      sub.out_dir = (fs::path(cfg.out_dir) /
                     ("alpha" + format_double(alpha) + "_k" + std::to_string(k)))
                        .string();
      const int rc = run_experiment(sub);
      if (rc != 0) status = rc;

      // pull per-run validation MAE back out of the reports
      double val_sum = 0.0, mae_sum = 0.0, rmse_sum = 0.0;
      std::size_t n = 0;
      for (std::size_t r = 0; r < sub.repeats; ++r) {
        const fs::path rp = fs::path(sub.out_dir) /
                            ("run_seed" + std::to_string(sub.base_seed + r)) / "report.json";
        if (!fs::exists(rp)) continue;
        std::ifstream in(rp);
        json j;
        in >> j;
        val_sum += j.at("best_val_mae").get<double>();
        mae_sum += j.at("mae").get<double>();
        rmse_sum += j.at("rmse").get<double>();
        ++n;
      }
      rows.push_back({alpha, k, n ? val_sum / n : 0.0, n ? mae_sum / n : 0.0,
                      n ? rmse_sum / n : 0.0, n > 0});
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].ok && (!rows[best].ok || rows[i].mean_val_mae < rows[best].mean_val_mae))
      best = i;

  std::ofstream out(fs::path(cfg.out_dir) / "sweep.csv");
  out << "alpha,k,val_mae,test_mae,test_rmse,best\n";
  for (std::size_t i = 0; i < rows.size(); ++i)
    out << format_double(rows[i].alpha) << "," << rows[i].k << ","
        << format_double(rows[i].mean_val_mae) << "," << format_double(rows[i].mean_mae) << ","
        << format_double(rows[i].mean_rmse) << "," << (i == best ? "1" : "0") << "\n";
  return status;
}

void aggregate_reports(const std::vector<std::string>& report_paths,
                       const std::string& out_csv) {
  struct Key {
    std::string model, protocol;
    double K;
    bool operator<(const Key& o) const {
      return std::tie(model, protocol, K) < std::tie(o.model, o.protocol, o.K);
    }
  };
  std::map<Key, std::vector<EvalResult>> groups;
  std::map<Key, ProtocolSpec> protos;
  for (const auto& p : report_paths) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("report: cannot open " + p);
    json j;
    in >> j;
    Key key{j.at("model").get<std::string>(), j.at("protocol").get<std::string>(),
            j.at("K").get<double>()};
    EvalResult ev;
    ev.mae = j.at("mae").get<double>();
    ev.rmse = j.at("rmse").get<double>();
    ev.count = j.at("count").get<std::size_t>();
    ev.cold_user_count = j.at("cold_user_count").get<std::size_t>();
    ev.empty = j.at("empty").get<bool>();
    groups[key].push_back(ev);
    ProtocolSpec ps;
    ps.kind = protocol_kind_from_string(key.protocol);
    ps.K = key.K;
    protos[key] = ps;
  }
  std::ofstream out(out_csv);
  out << "model,protocol,K,seeds,mean_mae,std_mae,mean_rmse,std_rmse\n";
  for (const auto& [key, evs] : groups) {
    const EvalReport rep = aggregate(protos[key], evs);
    out << key.model << "," << key.protocol << "," << format_double(key.K) << ","
        << rep.seed_mae.size() << "," << format_double(rep.mean_mae) << ","
        << format_double(rep.std_mae) << "," << format_double(rep.mean_rmse) << ","
        << format_double(rep.std_rmse) << "\n";
  }
}

}  // namespace crossrec
