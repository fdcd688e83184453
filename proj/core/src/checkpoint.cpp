#include "crossrec/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace crossrec {

namespace {

using nlohmann::json;

json matrix_to_json(const DenseMatrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

DenseMatrix matrix_from_json(const json& j) {
  DenseMatrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  m.data() = j.at("data").get<Vector>();
  if (m.data().size() != m.rows() * m.cols())
    throw std::runtime_error("checkpoint: matrix shape mismatch");
  return m;
}

json layers_to_json(const std::vector<AffineLayer>& layers) {
  json out = json::array();
  for (const auto& l : layers) out.push_back({{"W", matrix_to_json(l.W)}, {"b", l.b}});
  return out;
}

std::vector<AffineLayer> layers_from_json(const json& j) {
  std::vector<AffineLayer> out;
  for (const auto& l : j) {
    AffineLayer layer;
    layer.W = matrix_from_json(l.at("W"));
    layer.b = l.at("b").get<Vector>();
    if (layer.b.size() != layer.W.rows())
      throw std::runtime_error("checkpoint: layer bias shape mismatch");
    out.push_back(std::move(layer));
  }
  return out;
}

json config_to_json(const TrainConfig& c) {
  return json{{"k", c.k},
              {"alpha", c.alpha},
              {"lr", c.lr},
              {"batch_size", c.batch_size},
              {"dropout", c.dropout},
              {"max_epochs", c.max_epochs},
              {"patience", c.patience},
              {"lambda", c.lambda},
              {"rho", c.rho},
              {"eps", c.eps},
              {"seed", c.seed},
              {"L", c.L},
              {"optimizer", c.optimizer == OptimizerKind::RmsProp ? "rmsprop" : "sgd"},
              {"scale_encoder_input", c.scale_encoder_input}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.k = j.at("k").get<std::size_t>();
  c.alpha = j.at("alpha").get<double>();
  c.lr = j.at("lr").get<double>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.dropout = j.at("dropout").get<double>();
  c.max_epochs = j.at("max_epochs").get<std::size_t>();
  c.patience = j.at("patience").get<std::size_t>();
  c.lambda = j.at("lambda").get<double>();
  c.rho = j.at("rho").get<double>();
  c.eps = j.at("eps").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.L = j.at("L").get<std::size_t>();
  c.optimizer = j.at("optimizer").get<std::string>() == "sgd" ? OptimizerKind::Sgd
                                                              : OptimizerKind::RmsProp;
  c.scale_encoder_input = j.at("scale_encoder_input").get<bool>();
  return c;
}

}  // namespace

void save_checkpoint(const Model& model, const TrainConfig& cfg, const std::string& path) {
  json j;
  j["version"] = 1;
  j["kind"] = to_string(model.kind);
  j["alpha"] = model.alpha;
  j["gamma_max"] = model.gamma_max;
  j["n_source"] = model.n_source;
  j["scale_encoder_input"] = model.scale_encoder_input;
  j["flags"] = {{"freeze_offsets", model.flags.freeze_offsets},
                {"freeze_head", model.flags.freeze_head},
                {"single_domain", model.flags.single_domain},
                {"final_act", to_string(model.flags.final_act)}};
  if (uses_gcmf(model.kind)) {
    j["gcmf"] = {{"user_shared", matrix_to_json(model.gcmf.user_shared)},
                 {"user_offset_source", matrix_to_json(model.gcmf.user_offset[0])},
                 {"user_offset_target", matrix_to_json(model.gcmf.user_offset[1])},
                 {"items", matrix_to_json(model.gcmf.items)},
                 {"head", model.gcmf.head}};
  }
  if (uses_sed(model.kind)) {
    j["sed"] = {{"encoder", layers_to_json(model.sed.encoder)},
                {"decoder", layers_to_json(model.sed.decoder)},
                {"tower", layers_to_json(model.sed.tower)},
                {"items", matrix_to_json(model.sed.items)},
                {"head", model.sed.head}};
  }
  j["config"] = config_to_json(cfg);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_checkpoint: cannot write " + path);
  out << j.dump() << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  json j;
  in >> j;
  if (j.at("version").get<int>() != 1)
    throw std::runtime_error("load_checkpoint: unsupported version");

  Checkpoint cp;
  cp.config = config_from_json(j.at("config"));
  Model& m = cp.model;
  m.kind = model_kind_from_string(j.at("kind").get<std::string>());
  m.alpha = j.at("alpha").get<double>();
  m.gamma_max = j.at("gamma_max").get<double>();
  m.n_source = j.at("n_source").get<std::size_t>();
  m.scale_encoder_input = j.at("scale_encoder_input").get<bool>();
  const auto& f = j.at("flags");
  m.flags.freeze_offsets = f.at("freeze_offsets").get<bool>();
  m.flags.freeze_head = f.at("freeze_head").get<bool>();
  m.flags.single_domain = f.at("single_domain").get<bool>();
  const auto act = f.at("final_act").get<std::string>();
  m.flags.final_act = act == "identity"  ? ActivationKind::Identity
                      : act == "tanh"    ? ActivationKind::Tanh
                                         : ActivationKind::Sigmoid;
  if (j.contains("gcmf")) {
    const auto& g = j.at("gcmf");
    m.gcmf.user_shared = matrix_from_json(g.at("user_shared"));
    m.gcmf.user_offset[0] = matrix_from_json(g.at("user_offset_source"));
    m.gcmf.user_offset[1] = matrix_from_json(g.at("user_offset_target"));
    m.gcmf.items = matrix_from_json(g.at("items"));
    m.gcmf.head = g.at("head").get<Vector>();
  }
  if (j.contains("sed")) {
    const auto& s = j.at("sed");
    m.sed.encoder = layers_from_json(s.at("encoder"));
    m.sed.decoder = layers_from_json(s.at("decoder"));
    m.sed.tower = layers_from_json(s.at("tower"));
    m.sed.items = matrix_from_json(s.at("items"));
    m.sed.head = s.at("head").get<Vector>();
  }
  return cp;
}

}  // namespace crossrec
