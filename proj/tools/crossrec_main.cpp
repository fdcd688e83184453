// Command-line surface for the cross-domain recommender: dataset
// preparation, protocol splits, training, evaluation, grid sweeps, and
// report aggregation.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "crossrec/checkpoint.hpp"
#include "crossrec/experiment.hpp"
#include "crossrec/metrics.hpp"

namespace fs = std::filesystem;
using namespace crossrec;

namespace {

struct CommonFlags {
  std::string config_path;
  std::string source, target, model, protocol, out;
  double K = -1.0;
  long long k = -1, L = -1, batch = -1, epochs = -1, repeats = -1, seed = -1;
  long long min_ratings = -1;
  double alpha = -1.0, lr = -1.0, dropout = -1.0;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file (flags override file values)");
  cmd->add_option("--source", f.source, "source-domain ratings TSV");
  cmd->add_option("--target", f.target, "target-domain ratings TSV");
  cmd->add_option("--model", f.model, "pmf|gmf|gmf_cd|cmf|gcmf|sed|neucdcf");
  cmd->add_option("--protocol", f.protocol, "sparse|cold_start|full_cold_start");
  cmd->add_option("--K", f.K, "protocol percentage");
  cmd->add_option("--min-ratings", f.min_ratings, "per-user/domain rating floor for alignment");
  cmd->add_option("--k", f.k, "embedding dimension");
  cmd->add_option("--L", f.L, "encoder-decoder depth (even)");
  cmd->add_option("--alpha", f.alpha, "wide/deep trade-off in [0,1]");
  cmd->add_option("--lr", f.lr, "learning rate");
  cmd->add_option("--batch", f.batch, "mini-batch size");
  cmd->add_option("--dropout", f.dropout, "dropout rate");
  cmd->add_option("--epochs", f.epochs, "maximum training epochs");
  cmd->add_option("--seed", f.seed, "base seed (falls back to CROSSREC_SEED)");
  cmd->add_option("--repeats", f.repeats, "number of repeated seeds");
  cmd->add_option("--out", f.out, "output directory");
}

ExperimentConfig build_config(const CommonFlags& f) {
  ExperimentConfig cfg;
  if (!f.config_path.empty()) cfg = parse_config_file(f.config_path);
  if (!f.source.empty()) apply_config_key(cfg, "source", f.source);
  if (!f.target.empty()) apply_config_key(cfg, "target", f.target);
  if (!f.model.empty()) apply_config_key(cfg, "model", f.model);
  if (!f.protocol.empty()) apply_config_key(cfg, "protocol.kind", f.protocol);
  if (f.K >= 0.0) apply_config_key(cfg, "protocol.K", format_double(f.K));
  if (f.min_ratings >= 0) apply_config_key(cfg, "min_ratings", std::to_string(f.min_ratings));
  if (f.k >= 0) apply_config_key(cfg, "train.k", std::to_string(f.k));
  if (f.L >= 0) apply_config_key(cfg, "train.L", std::to_string(f.L));
  if (f.alpha >= 0.0) apply_config_key(cfg, "train.alpha", format_double(f.alpha));
  if (f.lr >= 0.0) apply_config_key(cfg, "train.lr", format_double(f.lr));
  if (f.batch >= 0) apply_config_key(cfg, "train.batch", std::to_string(f.batch));
  if (f.dropout >= 0.0) apply_config_key(cfg, "train.dropout", format_double(f.dropout));
  if (f.epochs >= 0) apply_config_key(cfg, "train.epochs", std::to_string(f.epochs));
  if (f.repeats >= 0) apply_config_key(cfg, "repeats", std::to_string(f.repeats));
  if (!f.out.empty()) apply_config_key(cfg, "out", f.out);
  if (f.seed >= 0) {
    apply_config_key(cfg, "seed", std::to_string(f.seed));
  } else if (const char* env = std::getenv("CROSSREC_SEED")) {
    apply_config_key(cfg, "seed", env);
  }
  return cfg;
}

std::vector<double> parse_real_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crossrec: cross-domain collaborative filtering experiments"};
  app.require_subcommand(1);

  // prep
  auto* prep = app.add_subcommand("prep", "align source/target domains and emit a manifest");
  std::string p_source, p_target, p_out = "dataset.json";
  double p_gmin = 1.0, p_gmax = 5.0;
  unsigned long long p_minr = 10;
  prep->add_option("--source", p_source)->required();
  prep->add_option("--target", p_target)->required();
  prep->add_option("--gamma-min", p_gmin);
  prep->add_option("--gamma-max", p_gmax);
  prep->add_option("--min-ratings", p_minr);
  prep->add_option("--out", p_out);

  // split
  auto* spl = app.add_subcommand("split", "assign train/validation/test labels");
  std::string s_data, s_out;
  unsigned long long s_seed = 0;
  std::string s_protocol;
  double s_K = 0.0;
  spl->add_option("--data", s_data)->required();
  spl->add_option("--seed", s_seed);
  spl->add_option("--protocol", s_protocol, "optionally apply sparse|cold_start|full_cold_start");
  spl->add_option("--K", s_K);
  spl->add_option("--out", s_out)->required();

  // train
  auto* trn = app.add_subcommand("train", "train one model on a split manifest");
  CommonFlags t_flags;
  std::string t_data;
  add_common_flags(trn, t_flags);
  trn->add_option("--data", t_data, "split manifest from `split`")->required();

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "evaluate a checkpoint on a manifest");
  std::string e_ckpt, e_data, e_protocol = "sparse", e_out;
  double e_K = 0.0;
  ev->add_option("--checkpoint", e_ckpt)->required();
  ev->add_option("--data", e_data)->required();
  ev->add_option("--protocol", e_protocol);
  ev->add_option("--K", e_K);
  ev->add_option("--out", e_out, "write report.json here (otherwise stdout)");

  // run
  auto* run = app.add_subcommand("run", "full repeated experiment: split+train+evaluate+summary");
  CommonFlags r_flags;
  add_common_flags(run, r_flags);

  // sweep
  auto* swp = app.add_subcommand("sweep", "run the experiment over alpha/k grids");
  CommonFlags w_flags;
  std::string w_alphas = "0.05,0.1,0.2,0.4,0.6,0.8,0.9,0.95";
  std::string w_ks = "8,16,32,48,64,80";
  add_common_flags(swp, w_flags);
  swp->add_option("--alphas", w_alphas, "comma-separated alpha grid");
  swp->add_option("--ks", w_ks, "comma-separated k grid");

  // report
  auto* rep = app.add_subcommand("report", "aggregate report.json files into a summary CSV");
  std::vector<std::string> reports;
  std::string rep_out = "summary.csv";
  rep->add_option("reports", reports, "report.json files")->required();
  rep->add_option("--out", rep_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*prep) {
      const auto src = load_ratings(p_source, p_gmin, p_gmax);
      const auto tgt = load_ratings(p_target, p_gmin, p_gmax);
      const auto ds = align_domains(src, tgt, p_minr);
      save_manifest(ds, p_out);
      std::cout << "users=" << ds.num_users() << " source_items=" << ds.num_source_items()
                << " target_items=" << ds.num_target_items() << " ratings=" << ds.triples.size()
                << " -> " << p_out << "\n";
    } else if (*spl) {
      auto ds = load_manifest(s_data);
      split(ds, SplitFractions{}, s_seed);
      if (!s_protocol.empty()) {
        ProtocolSpec proto{protocol_kind_from_string(s_protocol), s_K, s_seed};
        apply_protocol(ds, proto);
      }
      save_manifest(ds, s_out);
      std::cout << "split seed=" << s_seed << " target_train=" << ds.num_target_train()
                << " -> " << s_out << "\n";
    } else if (*trn) {
      ExperimentConfig cfg = build_config(t_flags);
      auto ds = load_manifest(t_data);
      TrainConfig tc = cfg.train;
      tc.seed = cfg.base_seed;
      const auto result = train(model_kind_from_string(cfg.model), ds, tc);
      const fs::path out_dir = cfg.out_dir;
      fs::create_directories(out_dir);
      save_checkpoint(result.model, tc, (out_dir / "checkpoint.json").string());
      std::ofstream log(out_dir / "trainlog.csv");
      log << "epoch,loss,val_mae\n";
      for (const auto& e : result.log)
        log << e.epoch << "," << format_double(e.loss) << "," << format_double(e.val_mae)
            << "\n";
      std::cout << "best_epoch=" << result.best_epoch
                << " best_val_mae=" << format_double(result.best_val_mae) << " ("
                << result.stop_reason << ") -> " << (out_dir / "checkpoint.json").string()
                << "\n";
    } else if (*ev) {
      const auto cp = load_checkpoint(e_ckpt);
      const auto ds = load_manifest(e_data);
      ProtocolSpec proto{protocol_kind_from_string(e_protocol), e_K, ds.protocol.seed};
      const auto res = evaluate(cp.model, ds, proto);
      nlohmann::json j{{"protocol", e_protocol}, {"K", e_K},
                       {"model", to_string(cp.model.kind)}, {"mae", res.mae},
                       {"rmse", res.rmse}, {"count", res.count},
                       {"cold_user_count", res.cold_user_count}, {"empty", res.empty}};
      if (e_out.empty()) {
        std::cout << j.dump(2) << "\n";
      } else {
        std::ofstream out(e_out);
        out << j.dump(2) << "\n";
      }
    } else if (*run) {
      return run_experiment(build_config(r_flags));
    } else if (*swp) {
      const auto alphas = parse_real_list(w_alphas);
      std::vector<std::size_t> ks;
      for (double v : parse_real_list(w_ks)) ks.push_back(static_cast<std::size_t>(v));
      return run_sweep(build_config(w_flags), alphas, ks);
    } else if (*rep) {
      aggregate_reports(reports, rep_out);
      std::cout << "wrote " << rep_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
