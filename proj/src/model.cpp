#include "flowbot/model.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace flowbot {

using nlohmann::json;

namespace {

void require_rows(const Dataset& ds, const char* who) {
  ds.validate();
  if (ds.rows() == 0) throw Error(std::string(who) + ": empty training set");
}

void require_both_classes(const Dataset& ds, const char* who) {
  require_rows(ds, who);
  const auto pos = ds.positives();
  if (pos == 0 || pos == static_cast<std::size_t>(ds.rows()))
    throw Error(std::string(who) + ": training data must contain both classes");
}

ModelArtifact blank_artifact(const Dataset& ds, const HyperParams& hp) {
  hp.validate();
  ModelArtifact m;
  m.hyperparams = hp;
  m.feature_names = ds.feature_names;
  return m;
}

// --- JSON helpers -----------------------------------------------------------

json vec_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vec_from(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json mat_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

Matrix mat_from(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw Error("model file: matrix size mismatch");
  return Eigen::Map<const Matrix>(data.data(), rows, cols);
}

json tree_json(const Tree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.value}));
  return nodes;
}

Tree tree_from(const json& j) {
  Tree t;
  for (const auto& n : j) {
    TreeNode node;
    node.feature = n.at(0).get<int>();
    node.threshold = n.at(1).get<double>();
    node.left = n.at(2).get<int>();
    node.right = n.at(3).get<int>();
    node.value = n.at(4).get<double>();
    t.nodes.push_back(node);
  }
  const int size = static_cast<int>(t.nodes.size());
  for (const auto& n : t.nodes)
    if (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size))
      throw Error("model file: tree child index out of range");
  if (t.nodes.empty()) throw Error("model file: empty tree");
  return t;
}

json linear_json(const LinearModel& m) { return {{"weights", vec_json(m.weights)}, {"intercept", m.intercept}}; }

LinearModel linear_from(const json& j) {
  LinearModel m;
  m.weights = vec_from(j.at("weights"));
  m.intercept = j.at("intercept").get<double>();
  return m;
}

json hyperparams_json(const HyperParams& hp) {
  json out = json::object();
  for (const auto& [key, value] : describe_params(hp)) {
    if (key == "model") continue;
    double number = 0;
    if (key == "layers") {
      out[key] = hp.nn.layers;
    } else if (value == "true" || value == "false") {
      out[key] = value == "true";
    } else if (key == "seed") {
      std::uint64_t seed = 0;
      parse_uint(value, seed);
      out[key] = seed;
    } else if (parse_double(value, number)) {
      out[key] = number;
    } else {
      out[key] = value;
    }
  }
  return out;
}

HyperParams hyperparams_from(Family family, const json& j) {
  HyperParams hp = default_params(family);
  for (const auto& [key, value] : j.items()) {
    std::string text;
    if (key == "layers") {
      for (const auto& w : value) text += (text.empty() ? "" : ":") + std::to_string(w.get<int>());
    } else if (value.is_boolean()) {
      text = value.get<bool>() ? "true" : "false";
    } else if (value.is_number_unsigned()) {
      text = std::to_string(value.get<std::uint64_t>());
    } else if (value.is_number_integer()) {
      text = std::to_string(value.get<std::int64_t>());
    } else if (value.is_number()) {
      text = format_double(value.get<double>());
    } else {
      text = value.get<std::string>();
    }
    set_param(hp, key, text);
  }
  hp.validate();
  return hp;
}

struct ParamsToJson {
  json operator()(const LinearModel& m) const { return linear_json(m); }
  json operator()(const SvmModel& m) const {
    json j{{"linear", linear_json(m.linear)}, {"kernel", to_string(m.kernel)}, {"degree", m.degree}};
    if (m.fourier) j["fourier"] = {{"weights", mat_json(m.fourier->weights)}, {"offsets", vec_json(m.fourier->offsets)}};
    return j;
  }
  json operator()(const Forest& f) const {
    json trees = json::array();
    for (const auto& t : f.trees) trees.push_back(tree_json(t));
    return {{"trees", trees}, {"importances", vec_json(f.importances)}};
  }
  json operator()(const Booster& b) const {
    json trees = json::array();
    for (const auto& t : b.trees) trees.push_back(tree_json(t));
    return {{"loss", to_string(b.loss)}, {"init", b.init}, {"trees", trees}, {"train_loss", b.train_loss}};
  }
  json operator()(const DenseNetwork<double>& net) const {
    json blocks = json::array();
    for (const auto& b : net.blocks)
      blocks.push_back({{"weight", mat_json(b.weight)},
                        {"bias", vec_json(b.bias)},
                        {"gamma", vec_json(b.gamma)},
                        {"beta", vec_json(b.beta)},
                        {"moving_mean", vec_json(b.moving_mean)},
                        {"moving_var", vec_json(b.moving_var)}});
    return {{"blocks", blocks},
            {"out_weight", mat_json(net.out_weight)},
            {"out_bias", vec_json(net.out_bias)},
            {"bn_momentum", net.bn_momentum},
            {"bn_epsilon", net.bn_epsilon}};
  }
};

ModelParameters params_from(Family family, const json& j) {
  switch (family) {
    case Family::logreg: return linear_from(j);
    case Family::svm: {
      SvmModel m;
      m.linear = linear_from(j.at("linear"));
      m.kernel = parse_kernel(j.at("kernel").get<std::string>());
      m.degree = j.at("degree").get<int>();
      if (j.contains("fourier")) {
        FourierMap f;
        f.weights = mat_from(j.at("fourier").at("weights"));
        f.offsets = vec_from(j.at("fourier").at("offsets"));
        m.fourier = std::move(f);
      }
      return m;
    }
    case Family::rf: {
      Forest f;
      for (const auto& t : j.at("trees")) f.trees.push_back(tree_from(t));
      f.importances = vec_from(j.at("importances"));
      return f;
    }
    case Family::gboost: {
      Booster b;
      b.loss = parse_loss(j.at("loss").get<std::string>());
      b.init = j.at("init").get<double>();
      for (const auto& t : j.at("trees")) b.trees.push_back(tree_from(t));
      b.train_loss = j.at("train_loss").get<std::vector<double>>();
      return b;
    }
    case Family::nn: {
      DenseNetwork<double> net;
      for (const auto& bj : j.at("blocks")) {
        DenseNetwork<double>::Block b;
        b.weight = mat_from(bj.at("weight"));
        b.bias = vec_from(bj.at("bias"));
        b.gamma = vec_from(bj.at("gamma"));
        b.beta = vec_from(bj.at("beta"));
        b.moving_mean = vec_from(bj.at("moving_mean"));
        b.moving_var = vec_from(bj.at("moving_var"));
        net.blocks.push_back(std::move(b));
      }
      net.out_weight = mat_from(j.at("out_weight"));
      net.out_bias = vec_from(j.at("out_bias"));
      net.bn_momentum = j.at("bn_momentum").get<double>();
      net.bn_epsilon = j.at("bn_epsilon").get<double>();
      return net;
    }
  }
  throw Error("model file: unknown family");
}

Eigen::Index expected_width(const ModelArtifact& m) { return static_cast<Eigen::Index>(m.feature_names.size()); }

}  // namespace

Matrix SvmModel::features(const Matrix& standardized) const {
  switch (kernel) {
    case Kernel::linear: return standardized;
    case Kernel::poly: return map_polynomial(standardized, degree);
    case Kernel::rbf:
      if (!fourier) throw Error("svm model: missing Fourier map");
      return fourier->apply(standardized);
  }
  return standardized;
}

Vector ModelArtifact::feature_importances() const {
  if (const auto* f = std::get_if<Forest>(&parameters)) return f->importances;
  return {};
}

ModelArtifact train_logreg(const Dataset& ds, const HyperParams& hp) {
  require_both_classes(ds, "logistic regression");
  ModelArtifact m = blank_artifact(ds, hp);
  m.standardization = Standardization::fit(ds.features);
  FitInfo info;
  m.parameters = fit_logistic(m.standardization->apply(ds.features), ds.labels, hp.logreg, &info);
  m.training.iterations = info.iterations;
  m.training.converged = info.converged;
  return m;
}

ModelArtifact train_linear_svm(const Dataset& ds, const HyperParams& hp) {
  require_both_classes(ds, "linear SVM");
  ModelArtifact m = blank_artifact(ds, hp);
  m.standardization = Standardization::fit(ds.features);
  SvmModel svm;
  svm.kernel = hp.svm.kernel;
  svm.degree = hp.svm.kernel == Kernel::poly ? hp.svm.degree : 1;
  if (hp.svm.kernel == Kernel::rbf)
    svm.fourier = FourierMap::sample(ds.cols(), hp.svm.gamma, hp.svm.rff_dim, hp.svm.seed ^ 0xF0F0F0F0ull);
  const Matrix mapped = svm.features(m.standardization->apply(ds.features));
  svm.linear = fit_hinge_sgd(mapped, ds.labels, hp.svm);
  m.training.iterations = hp.svm.epochs;
  m.parameters = std::move(svm);
  return m;
}

ModelArtifact train_random_forest(const Dataset& ds, const HyperParams& hp) {
  require_rows(ds, "random forest");
  ModelArtifact m = blank_artifact(ds, hp);
  m.parameters = fit_forest(ds.features, ds.labels, hp.forest);
  return m;
}

ModelArtifact train_gradient_boosting(const Dataset& ds, const HyperParams& hp) {
  require_both_classes(ds, "gradient boosting");
  ModelArtifact m = blank_artifact(ds, hp);
  Booster b = fit_booster(ds.features, ds.labels, hp.boost);
  m.training.iterations = hp.boost.n_trees;
  m.training.loss_curve = b.train_loss;
  m.parameters = std::move(b);
  return m;
}

ModelArtifact train_dense_nn(const Dataset& ds, const HyperParams& hp) {
  require_rows(ds, "neural network");
  ModelArtifact m = blank_artifact(ds, hp);
  m.standardization = Standardization::fit(ds.features);
  std::vector<double> curve;
  m.parameters = fit_dense_network(m.standardization->apply(ds.features), ds.labels, hp.nn, &curve);
  m.training.iterations = hp.nn.epochs;
  m.training.loss_curve = std::move(curve);
  return m;
}

ModelArtifact train(const Dataset& ds, const HyperParams& hp) {
  switch (hp.family) {
    case Family::logreg: return train_logreg(ds, hp);
    case Family::svm: return train_linear_svm(ds, hp);
    case Family::rf: return train_random_forest(ds, hp);
    case Family::gboost: return train_gradient_boosting(ds, hp);
    case Family::nn: return train_dense_nn(ds, hp);
  }
  throw Error("train: unknown family");
}

Prediction predict(const ModelArtifact& model, const Matrix& rows) {
  if (rows.cols() != expected_width(model))
    throw Error("predict: model expects " + std::to_string(expected_width(model)) + " features, got " +
                std::to_string(rows.cols()));
  auto standardized = [&] { return model.standardization ? model.standardization->apply(rows) : rows; };
  Prediction out;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          out.scores = p.decision(standardized()).unaryExpr([](double z) { return sigmoid(z); });
        } else if constexpr (std::is_same_v<T, SvmModel>) {
          out.scores = p.linear.decision(p.features(standardized())).unaryExpr([](double z) { return sigmoid(z); });
        } else if constexpr (std::is_same_v<T, Forest>) {
          out.scores = p.vote_fraction(rows);
        } else if constexpr (std::is_same_v<T, Booster>) {
          out.scores = p.probability(rows);
        } else {
          out.scores = p.probability(standardized().transpose());
        }
      },
      model.parameters);
  out.labels.resize(static_cast<std::size_t>(out.scores.size()));
  for (Eigen::Index i = 0; i < out.scores.size(); ++i) out.labels[static_cast<std::size_t>(i)] = out.scores[i] >= 0.5 ? 1 : 0;
  return out;
}

std::string to_json(const ModelArtifact& model) {
  json j;
  j["format_version"] = model.format_version;
  j["family"] = to_string(model.family());
  j["hyperparams"] = hyperparams_json(model.hyperparams);
  j["feature_names"] = model.feature_names;
  if (model.standardization)
    j["standardization"] = {{"mean", vec_json(model.standardization->mean)},
                            {"scale", vec_json(model.standardization->scale)}};
  else
    j["standardization"] = nullptr;
  j["parameters"] = std::visit(ParamsToJson{}, model.parameters);
  j["training"] = {{"iterations", model.training.iterations},
                   {"converged", model.training.converged},
                   {"loss_curve", model.training.loss_curve}};
  return j.dump(1) + "\n";
}

ModelArtifact model_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    ModelArtifact m;
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kModelFormatVersion)
      throw Error("model file: unsupported format_version " + std::to_string(m.format_version));
    const Family family = parse_family(j.at("family").get<std::string>());
    m.hyperparams = hyperparams_from(family, j.at("hyperparams"));
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    if (!j.at("standardization").is_null()) {
      Standardization s;
      s.mean = vec_from(j.at("standardization").at("mean"));
      s.scale = vec_from(j.at("standardization").at("scale"));
      m.standardization = std::move(s);
    }
    m.parameters = params_from(family, j.at("parameters"));
    const auto& t = j.at("training");
    m.training.iterations = t.at("iterations").get<int>();
    m.training.converged = t.at("converged").get<bool>();
    m.training.loss_curve = t.at("loss_curve").get<std::vector<double>>();
    return m;
  } catch (const json::exception& e) {
    throw Error(std::string("model file: ") + e.what());
  }
}

void save_model(const std::string& path, const ModelArtifact& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << to_json(model);
  if (!out) throw Error("write failed for '" + path + "'");
}

ModelArtifact load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace flowbot
