#include "flowbot/params.hpp"

#include <cmath>

namespace flowbot {

namespace {

double to_real(std::string_view key, std::string_view v) {
  double out = 0;
  if (!parse_double(v, out) || !std::isfinite(out)) throw Error("bad value '" + std::string(v) + "' for " + std::string(key));
  return out;
}

int to_int(std::string_view key, std::string_view v) {
  const double d = to_real(key, v);
  if (d != std::floor(d) || std::abs(d) > 2e9) throw Error("expected an integer for " + std::string(key));
  return static_cast<int>(d);
}

std::uint64_t to_seed(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  if (!parse_uint(v, out)) throw Error("bad seed '" + std::string(v) + "' for " + std::string(key));
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw Error("expected true/false for " + std::string(key));
}

std::vector<int> to_layers(std::string_view v) {
  std::vector<int> out;
  for (auto tok : split_view(v, ':')) out.push_back(to_int("layers", tok));
  return out;
}

std::string join_layers(const std::vector<int>& layers) {
  std::string s;
  for (std::size_t i = 0; i < layers.size(); ++i) s += (i ? ":" : "") + std::to_string(layers[i]);
  return s;
}

}  // namespace

std::string_view to_string(Family f) {
  switch (f) {
    case Family::logreg: return "logreg";
    case Family::svm: return "svm";
    case Family::rf: return "rf";
    case Family::gboost: return "gboost";
    case Family::nn: return "nn";
  }
  return "?";
}

std::string_view to_string(Penalty p) {
  switch (p) {
    case Penalty::l1: return "l1";
    case Penalty::l2: return "l2";
    case Penalty::elasticnet: return "elasticnet";
  }
  return "?";
}

std::string_view to_string(Kernel k) {
  switch (k) {
    case Kernel::linear: return "linear";
    case Kernel::poly: return "poly";
    case Kernel::rbf: return "rbf";
  }
  return "?";
}

std::string_view to_string(BoostLoss l) { return l == BoostLoss::deviance ? "deviance" : "exponential"; }

Family parse_family(std::string_view s) {
  for (Family f : {Family::logreg, Family::svm, Family::rf, Family::gboost, Family::nn})
    if (s == to_string(f)) return f;
  throw Error("unknown model family '" + std::string(s) + "'");
}

Penalty parse_penalty(std::string_view s) {
  for (Penalty p : {Penalty::l1, Penalty::l2, Penalty::elasticnet})
    if (s == to_string(p)) return p;
  throw Error("unknown penalty '" + std::string(s) + "'");
}

Kernel parse_kernel(std::string_view s) {
  for (Kernel k : {Kernel::linear, Kernel::poly, Kernel::rbf})
    if (s == to_string(k)) return k;
  throw Error("unknown kernel '" + std::string(s) + "'");
}

BoostLoss parse_loss(std::string_view s) {
  if (s == "deviance" || s == "log_loss") return BoostLoss::deviance;
  if (s == "exponential") return BoostLoss::exponential;
  throw Error("unknown boosting loss '" + std::string(s) + "'");
}

void HyperParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(std::string("invalid hyperparameter: ") + what);
  };
  switch (family) {
    case Family::logreg:
      require(logreg.C > 0, "C > 0");
      require(logreg.class_weights[0] >= 0 && logreg.class_weights[1] >= 0, "class weights >= 0");
      require(logreg.max_iter >= 1, "max_iter >= 1");
      break;
    case Family::svm:
      require(svm.alpha > 0, "alpha > 0");
      require(svm.l1_ratio >= 0 && svm.l1_ratio <= 1, "0 <= l1_ratio <= 1");
      require(svm.gamma > 0, "gamma > 0");
      require(svm.degree >= 1, "degree >= 1");
      require(svm.rff_dim >= 2 && svm.rff_dim % 2 == 0, "rff_dim even and >= 2");
      require(svm.epochs >= 1, "epochs >= 1");
      require(svm.eta0 > 0, "eta0 > 0");
      require(svm.class_weights[0] >= 0 && svm.class_weights[1] >= 0, "class weights >= 0");
      break;
    case Family::rf:
      require(forest.n_trees >= 1, "n_trees >= 1");
      require(forest.max_features >= 0, "max_features >= 0");
      break;
    case Family::gboost:
      require(boost.n_trees >= 1, "n_trees >= 1");
      require(boost.max_depth >= 1, "max_depth >= 1");
      require(boost.learning_rate > 0, "learning_rate > 0");
      break;
    case Family::nn:
      require(!nn.layers.empty(), "at least one hidden layer");
      for (int w : nn.layers) require(w >= 1, "layer sizes >= 1");
      require(nn.epochs >= 1, "epochs >= 1");
      require(nn.batch_size >= 1, "batch_size >= 1");
      require(nn.learning_rate > 0, "learning_rate > 0");
      require(nn.momentum >= 0 && nn.momentum < 1, "0 <= momentum < 1");
      break;
  }
}

HyperParams default_params(Family f) {
  HyperParams hp;
  hp.family = f;
  return hp;
}

void set_param(HyperParams& hp, std::string_view key, std::string_view v) {
  auto unknown = [&] {
    return Error("unknown hyperparameter '" + std::string(key) + "' for model " + std::string(to_string(hp.family)));
  };
  switch (hp.family) {
    case Family::logreg: {
      auto& p = hp.logreg;
      if (key == "C") p.C = to_real(key, v);
      else if (key == "weight_neg") p.class_weights[0] = to_real(key, v);
      else if (key == "weight_pos") p.class_weights[1] = to_real(key, v);
      else if (key == "max_iter") p.max_iter = to_int(key, v);
      else if (key == "tol") p.tol = to_real(key, v);
      else throw unknown();
      break;
    }
    case Family::svm: {
      auto& p = hp.svm;
      if (key == "alpha") p.alpha = to_real(key, v);
      else if (key == "l1_ratio") p.l1_ratio = to_real(key, v);
      else if (key == "penalty") p.penalty = parse_penalty(v);
      else if (key == "kernel") p.kernel = parse_kernel(v);
      else if (key == "degree") p.degree = to_int(key, v);
      else if (key == "gamma") p.gamma = to_real(key, v);
      else if (key == "rff_dim") p.rff_dim = to_int(key, v);
      else if (key == "epochs") p.epochs = to_int(key, v);
      else if (key == "eta0") p.eta0 = to_real(key, v);
      else if (key == "weight_neg") p.class_weights[0] = to_real(key, v);
      else if (key == "weight_pos") p.class_weights[1] = to_real(key, v);
      else if (key == "seed") p.seed = to_seed(key, v);
      else throw unknown();
      break;
    }
    case Family::rf: {
      auto& p = hp.forest;
      if (key == "n_trees") p.n_trees = to_int(key, v);
      else if (key == "max_depth") p.max_depth = to_int(key, v);
      else if (key == "max_features") p.max_features = to_int(key, v);
      else if (key == "bootstrap") p.bootstrap = to_bool(key, v);
      else if (key == "seed") p.seed = to_seed(key, v);
      else throw unknown();
      break;
    }
    case Family::gboost: {
      auto& p = hp.boost;
      if (key == "n_trees") p.n_trees = to_int(key, v);
      else if (key == "loss") p.loss = parse_loss(v);
      else if (key == "max_depth") p.max_depth = to_int(key, v);
      else if (key == "learning_rate") p.learning_rate = to_real(key, v);
      else throw unknown();
      break;
    }
    case Family::nn: {
      auto& p = hp.nn;
      if (key == "layers") p.layers = to_layers(v);
      else if (key == "epochs") p.epochs = to_int(key, v);
      else if (key == "batch_size") p.batch_size = to_int(key, v);
      else if (key == "learning_rate") p.learning_rate = to_real(key, v);
      else if (key == "momentum") p.momentum = to_real(key, v);
      else if (key == "zero_init_output") p.zero_init_output = to_bool(key, v);
      else if (key == "seed") p.seed = to_seed(key, v);
      else throw unknown();
      break;
    }
  }
}

std::vector<std::string> param_keys(Family f) {
  switch (f) {
    case Family::logreg: return {"C", "weight_neg", "weight_pos", "max_iter", "tol"};
    case Family::svm:
      return {"alpha", "l1_ratio", "penalty", "kernel", "degree", "gamma",
              "rff_dim", "epochs", "eta0", "weight_neg", "weight_pos", "seed"};
    case Family::rf: return {"n_trees", "max_depth", "max_features", "bootstrap", "seed"};
    case Family::gboost: return {"n_trees", "loss", "max_depth", "learning_rate"};
    case Family::nn: return {"layers", "epochs", "batch_size", "learning_rate", "momentum", "zero_init_output", "seed"};
  }
  return {};
}

std::vector<std::pair<std::string, std::string>> describe_params(const HyperParams& hp) {
  std::vector<std::pair<std::string, std::string>> out;
  auto add = [&](std::string k, std::string v) { out.emplace_back(std::move(k), std::move(v)); };
  auto real = [](double d) { return format_double(d); };
  add("model", std::string(to_string(hp.family)));
  switch (hp.family) {
    case Family::logreg:
      add("C", real(hp.logreg.C));
      add("weight_neg", real(hp.logreg.class_weights[0]));
      add("weight_pos", real(hp.logreg.class_weights[1]));
      add("max_iter", std::to_string(hp.logreg.max_iter));
      add("tol", real(hp.logreg.tol));
      break;
    case Family::svm:
      add("alpha", real(hp.svm.alpha));
      add("l1_ratio", real(hp.svm.l1_ratio));
      add("penalty", std::string(to_string(hp.svm.penalty)));
      add("kernel", std::string(to_string(hp.svm.kernel)));
      add("degree", std::to_string(hp.svm.degree));
      add("gamma", real(hp.svm.gamma));
      add("rff_dim", std::to_string(hp.svm.rff_dim));
      add("epochs", std::to_string(hp.svm.epochs));
      add("eta0", real(hp.svm.eta0));
      add("weight_neg", real(hp.svm.class_weights[0]));
      add("weight_pos", real(hp.svm.class_weights[1]));
      add("seed", std::to_string(hp.svm.seed));
      break;
    case Family::rf:
      add("n_trees", std::to_string(hp.forest.n_trees));
      add("max_depth", std::to_string(hp.forest.max_depth));
      add("max_features", std::to_string(hp.forest.max_features));
      add("bootstrap", hp.forest.bootstrap ? "true" : "false");
      add("seed", std::to_string(hp.forest.seed));
      break;
    case Family::gboost:
      add("n_trees", std::to_string(hp.boost.n_trees));
      add("loss", std::string(to_string(hp.boost.loss)));
      add("max_depth", std::to_string(hp.boost.max_depth));
      add("learning_rate", real(hp.boost.learning_rate));
      break;
    case Family::nn:
      add("layers", join_layers(hp.nn.layers));
      add("epochs", std::to_string(hp.nn.epochs));
      add("batch_size", std::to_string(hp.nn.batch_size));
      add("learning_rate", real(hp.nn.learning_rate));
      add("momentum", real(hp.nn.momentum));
      add("zero_init_output", hp.nn.zero_init_output ? "true" : "false");
      add("seed", std::to_string(hp.nn.seed));
      break;
  }
  return out;
}

}  // namespace flowbot
