#include "ihoc/config.hpp"

#include "ihoc/errors.hpp"

#include <fmt/core.h>
#include <json.hpp>

#include <cmath>
#include <memory>
#include <random>
#include <set>
#include <sstream>

namespace ihoc {

using nlohmann::json;

const char *to_string(Command c) {
  switch (c) {
  case Command::solve:
    return "solve";
  case Command::verify:
    return "verify";
  case Command::continuation:
    return "continue";
  case Command::falab:
    return "falab";
  case Command::audit:
    return "audit";
  }
  return "?";
}

Mode mode_from_string(const std::string &name) {
  if (name == "equation")
    return Mode::equation;
  if (name == "inequation")
    return Mode::inequation;
  throw ConfigError(fmt::format("unknown mode '{}' (equation | inequation)", name));
}

std::vector<int> parse_schedule(const std::string &text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception &) {
      throw ConfigError(fmt::format("schedule entry '{}' is not an integer", item));
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used])))
      ++used;
    if (used != item.size())
      throw ConfigError(fmt::format("schedule entry '{}' is not an integer", item));
    out.push_back(v);
  }
  if (out.empty())
    throw ConfigError("schedule is empty");
  return out;
}

std::string fnv1a_hex(const std::string &bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return fmt::format("{:016x}", h);
}

namespace {

/// JSON value with its path, for field diagnostics.
class Node {
public:
  Node(const json &j, std::string path) : j_(&j), path_(std::move(path)) {}

  const std::string &path() const { return path_; }
  const json &raw() const { return *j_; }

  [[noreturn]] void fail(const std::string &what) const {
    throw ConfigError(fmt::format("{}: {}", path_.empty() ? "/" : path_, what));
  }

  bool has(const std::string &key) const {
    return j_->is_object() && j_->contains(key);
  }
  Node at(const std::string &key) const {
    if (!j_->is_object())
      fail("expected an object");
    if (!j_->contains(key))
      throw ConfigError(fmt::format("{}/{}: missing required field", path_, key));
    return Node(j_->at(key), path_ + "/" + key);
  }
  std::optional<Node> get(const std::string &key) const {
    if (!has(key))
      return std::nullopt;
    return Node(j_->at(key), path_ + "/" + key);
  }
  Node index(std::size_t i) const {
    return Node(j_->at(i), fmt::format("{}/{}", path_, i));
  }
  std::size_t size() const {
    if (!j_->is_array())
      fail("expected an array");
    return j_->size();
  }

  void allow(std::initializer_list<const char *> keys) const {
    if (!j_->is_object())
      fail("expected an object");
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j_->begin(); it != j_->end(); ++it)
      if (!ok.count(it.key()))
        throw ConfigError(fmt::format("{}/{}: unknown field", path_, it.key()));
  }

  double number() const {
    if (!j_->is_number())
      fail("expected a number");
    const double v = j_->get<double>();
    if (!std::isfinite(v))
      fail("expected a finite number");
    return v;
  }
  int integer() const {
    if (!j_->is_number_integer())
      fail("expected an integer");
    return j_->get<int>();
  }
  std::uint64_t unsigned_integer() const {
    if (!j_->is_number_integer() || j_->get<long long>() < 0)
      fail("expected a nonnegative integer");
    return j_->get<std::uint64_t>();
  }
  bool boolean() const {
    if (!j_->is_boolean())
      fail("expected true or false");
    return j_->get<bool>();
  }
  std::string str() const {
    if (!j_->is_string())
      fail("expected a string");
    return j_->get<std::string>();
  }
  Vec vec() const {
    if (j_->is_number())
      return Vec::Constant(1, number());
    Vec v(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < size(); ++i)
      v(static_cast<Eigen::Index>(i)) = index(i).number();
    return v;
  }
  Vec vec(int dim) const {
    Vec v = vec();
    if (v.size() != dim)
      fail(fmt::format("expected a vector of length {}", dim));
    return v;
  }
  Mat mat() const {
    if (j_->is_number())
      return Mat::Constant(1, 1, number());
    const std::size_t rows = size();
    if (rows == 0)
      fail("expected a nonempty matrix");
    const std::size_t cols = index(0).size();
    Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
      const Node row = index(i);
      if (row.size() != cols)
        row.fail("ragged matrix row");
      for (std::size_t k = 0; k < cols; ++k)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
            row.index(k).number();
    }
    return m;
  }
  Mat mat(int rows, int cols) const {
    Mat m = mat();
    if (m.rows() != rows || m.cols() != cols)
      fail(fmt::format("expected a {}x{} matrix", rows, cols));
    return m;
  }
  VecSeq vec_list() const {
    VecSeq out;
    for (std::size_t i = 0; i < size(); ++i)
      out.push_back(index(i).vec());
    return out;
  }

private:
  const json *j_;
  std::string path_;
};

/// Runs a constructor and rewrites its error as a field diagnostic.
template <typename Fn> auto guarded(const Node &node, Fn &&fn) {
  try {
    return fn();
  } catch (const ConfigError &) {
    throw;
  } catch (const std::exception &e) {
    node.fail(e.what());
  }
}

ConvexControlSet parse_set(const Node &node, int m) {
  const std::string kind = node.at("kind").str();
  if (kind == "box") {
    node.allow({"kind", "lo", "hi"});
    const Vec lo = node.at("lo").vec(m), hi = node.at("hi").vec(m);
    return guarded(node, [&] { return ConvexControlSet::box(lo, hi); });
  }
  if (kind == "ball") {
    node.allow({"kind", "center", "radius"});
    const Vec c = node.at("center").vec(m);
    const double r = node.at("radius").number();
    return guarded(node, [&] { return ConvexControlSet::ball(c, r); });
  }
  if (kind == "polytope") {
    node.allow({"kind", "A", "b"});
    const Mat a = node.at("A").mat();
    if (a.cols() != m)
      node.at("A").fail(fmt::format("expected {} columns", m));
    const Vec b = node.at("b").vec(static_cast<int>(a.rows()));
    return guarded(node, [&] { return ConvexControlSet::polytope(a, b); });
  }
  node.at("kind").fail(fmt::format("unknown control set '{}'", kind));
}

std::shared_ptr<const StageDynamics> parse_dynamics(const Node &node, int n,
                                                    int m) {
  const std::string name = node.at("name").str();
  if (name == "linear") {
    node.allow({"name", "A", "B", "c"});
    const Mat a = node.at("A").mat(n, n), b = node.at("B").mat(n, m);
    const Vec c = node.has("c") ? node.at("c").vec(n) : Vec::Zero(n);
    return guarded(node, [&] { return std::make_shared<LinearDynamics>(a, b, c); });
  }
  if (name == "growth") {
    node.allow({"name", "alpha"});
    if (n != 1 || m != 1)
      node.fail("growth dynamics need n = m = 1");
    const double alpha = node.at("alpha").number();
    return guarded(node, [&] { return std::make_shared<GrowthDynamics>(alpha); });
  }
  if (name == "static") {
    node.allow({"name"});
    return std::make_shared<StaticDynamics>(n, m);
  }
  node.at("name").fail(fmt::format("unknown dynamics '{}'", name));
}

std::shared_ptr<const StageReward> parse_reward(const Node &node, int n, int m) {
  const std::string name = node.at("name").str();
  if (name == "quadratic") {
    node.allow({"name", "Q", "R"});
    const Mat q = node.at("Q").mat(n, n), r = node.at("R").mat(m, m);
    return guarded(node, [&] { return std::make_shared<QuadraticReward>(q, r); });
  }
  if (name == "linear") {
    node.allow({"name", "cx", "cu"});
    return std::make_shared<LinearReward>(node.at("cx").vec(n),
                                          node.at("cu").vec(m));
  }
  if (name == "log_control") {
    node.allow({"name"});
    return std::make_shared<LogControlReward>(n, m);
  }
  if (name == "zero") {
    node.allow({"name"});
    return std::make_shared<ZeroReward>(n, m);
  }
  node.at("name").fail(fmt::format("unknown reward '{}'", name));
}

StageData parse_stage(const Node &node, int n, int m) {
  node.allow({"dynamics", "reward", "control_set"});
  return {parse_dynamics(node.at("dynamics"), n, m),
          parse_reward(node.at("reward"), n, m),
          parse_set(node.at("control_set"), m)};
}

LqParams parse_lq(const std::optional<Node> &params) {
  int n = 2;
  if (params && params->has("n"))
    n = params->at("n").integer();
  if (params && params->has("A"))
    n = static_cast<int>(params->at("A").mat().rows());
  LqParams p;
  if (n >= 1 && n <= 4) {
    p = lq_default(n);
  } else {
    if (!params || !params->has("A") || !params->has("B") || !params->has("Q") ||
        !params->has("R") || !params->has("sigma"))
      (params ? *params : Node(json::object(), "/problem/params"))
          .fail("dimensions above 4 need explicit A, B, Q, R and sigma");
  }
  if (!params)
    return p;
  params->allow({"n", "A", "B", "Q", "R", "discount", "sigma", "control_bound"});
  if (params->has("A"))
    p.a = params->at("A").mat(n, n);
  if (params->has("B")) {
    p.b = params->at("B").mat();
    if (p.b.rows() != n)
      params->at("B").fail(fmt::format("expected {} rows", n));
  }
  const int m = static_cast<int>(p.b.cols());
  if (params->has("Q"))
    p.q = params->at("Q").mat(n, n);
  if (params->has("R"))
    p.r = params->at("R").mat(m, m);
  if (params->has("discount"))
    p.discount = params->at("discount").number();
  if (params->has("sigma"))
    p.sigma = params->at("sigma").vec(n);
  if (params->has("control_bound"))
    p.control_bound = params->at("control_bound").number();
  return p;
}

RamseyParams parse_ramsey(const std::optional<Node> &params) {
  RamseyParams p;
  if (!params)
    return p;
  params->allow({"alpha", "discount", "k0", "c_lo", "c_hi"});
  if (params->has("alpha"))
    p.alpha = params->at("alpha").number();
  if (params->has("discount"))
    p.discount = params->at("discount").number();
  if (params->has("k0"))
    p.k0 = params->at("k0").number();
  if (params->has("c_lo"))
    p.c_lo = params->at("c_lo").number();
  if (params->has("c_hi"))
    p.c_hi = params->at("c_hi").number();
  return p;
}

int parse_dim_param(const std::optional<Node> &params) {
  if (!params)
    return 1;
  params->allow({"n"});
  return params->has("n") ? params->at("n").integer() : 1;
}

void parse_problem(const Node &node, RunConfig &cfg) {
  if (node.has("catalog")) {
    node.allow({"catalog", "params", "anchor_s", "mode"});
    const std::string name = node.at("catalog").str();
    const auto params = node.get("params");
    if (params && !params->raw().is_object())
      params->fail("expected an object");
    const int s = cfg.anchor_s;
    cfg.problem_name = name;
    cfg.entry = guarded(node, [&]() -> CatalogEntry {
      if (name == "lq")
        return lq_entry(parse_lq(params), s);
      if (name == "lq_scalar") {
        auto e = catalog_entry("lq_scalar");
        e.problem = e.problem.with_anchor(s);
        return e;
      }
      if (name == "ramsey")
        return ramsey_entry(parse_ramsey(params), Mode::equation, s);
      if (name == "ramsey_free_disposal")
        return ramsey_entry(parse_ramsey(params), Mode::inequation, s);
      if (name == "abnormal")
        return abnormal_entry(parse_dim_param(params), s);
      if (name == "zero_reward")
        return zero_reward_entry(parse_dim_param(params), s);
      node.at("catalog").fail(fmt::format("unknown catalog entry '{}'", name));
    });
    cfg.problem = cfg.entry->problem;
    if (node.has("mode"))
      cfg.problem = cfg.problem->with_mode(mode_from_string(node.at("mode").str()));
    return;
  }

  node.allow({"name", "n", "m", "mode", "sigma", "anchor_s", "discount", "stages",
              "steady_state"});
  cfg.problem_name = node.has("name") ? node.at("name").str() : "custom";
  const int n = node.at("n").integer(), m = node.at("m").integer();
  if (n < 1 || m < 1)
    node.fail("n and m must be positive");
  const Mode mode =
      node.has("mode") ? mode_from_string(node.at("mode").str()) : Mode::equation;
  const Vec sigma = node.at("sigma").vec(n);
  const double discount = node.has("discount") ? node.at("discount").number() : 1.0;

  const Node stages = node.at("stages");
  stages.allow({"kind", "entries"});
  const std::string kind = stages.at("kind").str();
  const Node entries = stages.at("entries");
  std::vector<StageData> data;
  for (std::size_t i = 0; i < entries.size(); ++i)
    data.push_back(parse_stage(entries.index(i), n, m));
  if (data.empty())
    entries.fail("at least one stage entry is required");
  StageSchedule sched = guarded(stages, [&] {
    if (kind == "stationary") {
      if (data.size() != 1)
        stages.at("entries").fail("a stationary schedule has exactly one entry");
      return StageSchedule::stationary(data.front());
    }
    if (kind == "periodic")
      return StageSchedule::periodic(data);
    if (kind == "tabulated")
      return StageSchedule::tabulated(data);
    stages.at("kind").fail(fmt::format("unknown stage kind '{}'", kind));
  });
  cfg.problem = guarded(node, [&] {
    return ControlProblem(sched, sigma, mode, cfg.anchor_s, discount);
  });
  if (node.has("steady_state")) {
    const Node ss = node.at("steady_state");
    ss.allow({"x", "u"});
    cfg.problem = cfg.problem->with_steady_state(
        {ss.at("x").vec(n), ss.at("u").vec(m)});
  }
}

Process parse_process(const Node &node, int n, int m) {
  node.allow({"x", "u"});
  Process proc;
  const Node xs = node.at("x"), us = node.at("u");
  for (std::size_t i = 0; i < xs.size(); ++i)
    proc.x.push_back(xs.index(i).vec(n));
  for (std::size_t i = 0; i < us.size(); ++i)
    proc.u.push_back(us.index(i).vec(m));
  if (proc.u.size() < 3 || proc.x.size() != proc.u.size() + 1)
    node.fail("need x_0..x_{T+1} and u_0..u_T with T >= 2");
  return proc;
}

/// Family of functionals for the lab.
void parse_family(const Node &node, FaLabSpec &lab) {
  node.allow({"kind", "dim", "count", "lambda", "vectors", "angle"});
  const std::string kind = node.at("kind").str();
  lab.family_kind = kind;
  auto &fam = lab.family;
  VecSeq vectors;
  if (node.has("vectors"))
    vectors = node.at("vectors").vec_list();
  fam.dim = node.has("dim") ? node.at("dim").integer()
                            : (vectors.empty() ? 2 : static_cast<int>(vectors[0].size()));
  if (fam.dim < 1)
    node.at("dim").fail("dimension must be positive");
  int count = node.has("count") ? node.at("count").integer()
                                : std::max<int>(1, static_cast<int>(vectors.size()));
  if (count < 1)
    node.at("count").fail("count must be positive");
  if ((kind == "abs_linear" || kind == "linear") && vectors.empty())
    node.fail("this family needs 'vectors'");
  if (!vectors.empty())
    count = static_cast<int>(vectors.size());
  else if (!node.has("count") && node.has("lambda") && node.at("lambda").raw().is_array())
    count = std::max<int>(1, static_cast<int>(node.at("lambda").raw().size()));
  for (const auto &v : vectors)
    if (v.size() != fam.dim)
      node.at("vectors").fail("vector length differs from dim");

  if (node.has("lambda")) {
    const Node l = node.at("lambda");
    if (l.raw().is_number()) {
      fam.lambda.assign(static_cast<std::size_t>(count), l.number());
    } else {
      const Vec v = l.vec(count);
      fam.lambda.assign(v.data(), v.data() + v.size());
    }
  } else {
    fam.lambda.assign(static_cast<std::size_t>(count), 1.0);
  }

  const int dim = fam.dim;
  for (int k = 0; k < count; ++k) {
    const double lam = fam.lambda[static_cast<std::size_t>(k)];
    if (kind == "norm") {
      fam.members.push_back([](const Vec &z) { return z.norm(); });
      fam.sublinear = true;
    } else if (kind == "rotation") {
      const double th = (node.has("angle") ? node.at("angle").number() : 0.7) * k;
      fam.members.push_back([th, dim](const Vec &z) {
        Vec r = z;
        if (dim >= 2) {
          r(0) = std::cos(th) * z(0) - std::sin(th) * z(1);
          r(1) = std::sin(th) * z(0) + std::cos(th) * z(1);
        }
        return r.norm();
      });
      fam.sublinear = true;
    } else if (kind == "abs_linear") {
      const Vec v = vectors[static_cast<std::size_t>(k)];
      fam.members.push_back([v](const Vec &z) { return std::abs(v.dot(z)); });
      fam.sublinear = true;
    } else if (kind == "linear") {
      const Vec v = vectors[static_cast<std::size_t>(k)];
      fam.members.push_back([v](const Vec &z) { return v.dot(z); });
      fam.sublinear = true;
    } else if (kind == "positive_part") {
      fam.members.push_back([lam](const Vec &z) { return lam * std::max(z(0), 0.0); });
      fam.sublinear = true;
    } else if (kind == "zero") {
      fam.members.push_back([](const Vec &) { return 0.0; });
      fam.sublinear = true;
    } else {
      node.at("kind").fail(fmt::format("unknown family '{}'", kind));
    }
  }
  guarded(node, [&] {
    fam.validate();
    return 0;
  });
}

void parse_falab(const Node &node, RunConfig &cfg) {
  node.allow({"family", "body", "operators", "resolution", "ladder_max"});
  FaLabSpec &lab = cfg.falab;
  if (node.has("family")) {
    parse_family(node.at("family"), lab);
    const int dim = lab.family.dim;
    if (node.has("body")) {
      const Node body = node.at("body");
      body.allow({"set", "a", "probes", "probe_count"});
      const auto k = parse_set(body.at("set"), dim);
      const Vec a = body.at("a").vec(dim);
      const int count =
          body.has("probe_count") ? body.at("probe_count").integer() : 256;
      VecSeq probes;
      if (body.has("probes")) {
        const Node pr = body.at("probes");
        if (pr.raw().is_array())
          probes = pr.vec_list();
        else
          probes = probe_points(parse_set(pr, dim), count, cfg.seed);
      } else {
        probes = probe_points(k, count, cfg.seed);
      }
      lab.body = guarded(body, [&] { return ConvexBody(k, a, probes); });
    }
  }
  if (node.has("operators")) {
    const Node ops = node.at("operators");
    if (ops.raw().is_array()) {
      for (std::size_t i = 0; i < ops.size(); ++i)
        lab.operators.push_back(ops.index(i).mat());
    } else {
      ops.allow({"kind", "count", "dim"});
      const std::string kind = ops.at("kind").str();
      const int count = ops.has("count") ? ops.at("count").integer() : 10;
      const int dim = ops.has("dim") ? ops.at("dim").integer() : 3;
      if (count < 1 || dim < 1)
        ops.fail("count and dim must be positive");
      std::mt19937_64 rng(cfg.seed);
      std::uniform_real_distribution<double> unif(-1.0, 1.0);
      for (int k = 1; k <= count; ++k) {
        Mat t = Mat::Identity(dim, dim);
        if (kind == "random") {
          for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
              t(i, j) = unif(rng);
        } else if (kind == "diag_inverse") {
          t(dim - 1, dim - 1) = 1.0 / k;
        } else if (kind == "rotation_powers") {
          if (dim >= 2) {
            const double th = 0.7 * k;
            t(0, 0) = std::cos(th);
            t(0, 1) = -std::sin(th);
            t(1, 0) = std::sin(th);
            t(1, 1) = std::cos(th);
          }
        } else {
          ops.at("kind").fail(fmt::format("unknown operator family '{}'", kind));
        }
        lab.operators.push_back(t);
      }
    }
    if (!lab.operators.empty()) {
      const auto dim = lab.operators.front().cols();
      for (const auto &t : lab.operators)
        if (t.cols() != dim)
          ops.fail("operators must share their domain dimension");
      std::mt19937_64 rng(cfg.seed + 1);
      std::normal_distribution<double> g(0.0, 1.0);
      for (int k = 0; k < 16; ++k) {
        Vec x(dim);
        for (Eigen::Index i = 0; i < dim; ++i)
          x(i) = g(rng);
        lab.operator_probes.push_back(x);
      }
    }
  }
  if (node.has("resolution"))
    lab.resolution = node.at("resolution").integer();
  if (node.has("ladder_max"))
    lab.ladder_max = node.at("ladder_max").integer();
}

void parse_tolerances(const Node &node, RunConfig &cfg) {
  node.allow({"certificate", "feasibility", "stationarity", "recheck"});
  auto positive = [](const Node &v) {
    const double x = v.number();
    if (!(x > 0.0))
      v.fail("tolerance must be positive");
    return x;
  };
  if (node.has("certificate"))
    cfg.tol = positive(node.at("certificate"));
  if (node.has("feasibility"))
    cfg.solver.feasibility_tol = positive(node.at("feasibility"));
  if (node.has("stationarity"))
    cfg.solver.stationarity_tol = positive(node.at("stationarity"));
  if (node.has("recheck"))
    cfg.solver.recheck_tol = positive(node.at("recheck"));
}

void parse_solver(const Node &node, RunConfig &cfg) {
  node.allow({"max_outer", "max_inner", "penalty_initial", "penalty_growth",
              "penalty_max", "start"});
  auto &s = cfg.solver;
  if (node.has("max_outer"))
    s.max_outer = node.at("max_outer").integer();
  if (node.has("max_inner"))
    s.max_inner = node.at("max_inner").integer();
  if (node.has("penalty_initial"))
    s.penalty_initial = node.at("penalty_initial").number();
  if (node.has("penalty_growth"))
    s.penalty_growth = node.at("penalty_growth").number();
  if (node.has("penalty_max"))
    s.penalty_max = node.at("penalty_max").number();
  if (node.has("start"))
    s.start = guarded(node.at("start"),
                      [&] { return start_strategy_from_string(node.at("start").str()); });
  if (s.max_outer < 1 || s.max_inner < 1)
    node.fail("iteration caps must be positive");
  if (!(s.penalty_initial > 0.0) || !(s.penalty_growth > 1.0) ||
      !(s.penalty_max >= s.penalty_initial))
    node.fail("penalty schedule needs initial > 0, growth > 1, max >= initial");
}

std::string describe_overrides(const CliOverrides &o) {
  std::string s;
  if (o.schedule) {
    s += "schedule=";
    for (int t : *o.schedule)
      s += fmt::format("{},", t);
  }
  if (o.tol)
    s += fmt::format("tol={:.17g};", *o.tol);
  if (o.seed)
    s += fmt::format("seed={};", *o.seed);
  if (o.mode)
    s += fmt::format("mode={};", to_string(*o.mode));
  return s;
}

} // namespace

RunConfig parse_config(const std::string &text, const CliOverrides &overrides) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(fmt::format("malformed JSON at line {}, column {}: {}", line,
                                  col, e.what()));
  }
  const Node root(doc, "");
  if (!doc.is_object())
    root.fail("the configuration must be a JSON object");
  root.allow({"command", "problem", "horizon", "anchor_s", "schedule", "tolerances",
              "solver", "seed", "direction_samples", "candidate", "multipliers",
              "terminal", "continuation", "falab", "out"});

  RunConfig cfg;
  const std::string cmd = root.at("command").str();
  if (cmd == "solve")
    cfg.command = Command::solve;
  else if (cmd == "verify")
    cfg.command = Command::verify;
  else if (cmd == "continue")
    cfg.command = Command::continuation;
  else if (cmd == "falab")
    cfg.command = Command::falab;
  else if (cmd == "audit")
    cfg.command = Command::audit;
  else
    root.at("command").fail(
        fmt::format("unknown command '{}' (solve | verify | continue | falab | audit)", cmd));

  if (root.has("seed"))
    cfg.seed = root.at("seed").unsigned_integer();
  if (overrides.seed)
    cfg.seed = *overrides.seed;
  if (root.has("anchor_s"))
    cfg.anchor_s = root.at("anchor_s").integer();
  if (root.has("problem") && root.at("problem").has("anchor_s"))
    cfg.anchor_s = root.at("problem").at("anchor_s").integer();
  if (cfg.anchor_s < 1)
    throw ConfigError("/anchor_s: must be at least 1");
  if (root.has("horizon"))
    cfg.horizon = root.at("horizon").integer();
  if (cfg.horizon < 2)
    throw ConfigError("/horizon: must be at least 2");
  if (root.has("direction_samples"))
    cfg.direction_samples = root.at("direction_samples").integer();
  if (root.has("tolerances"))
    parse_tolerances(root.at("tolerances"), cfg);
  if (overrides.tol) {
    if (!(*overrides.tol > 0.0))
      throw ConfigError("--tol: tolerance must be positive");
    cfg.tol = *overrides.tol;
  }
  if (root.has("solver"))
    parse_solver(root.at("solver"), cfg);

  if (root.has("schedule")) {
    const Node sn = root.at("schedule");
    cfg.schedule.clear();
    for (std::size_t i = 0; i < sn.size(); ++i)
      cfg.schedule.push_back(sn.index(i).integer());
  }
  if (overrides.schedule)
    cfg.schedule = *overrides.schedule;
  for (std::size_t i = 0; i < cfg.schedule.size(); ++i)
    if (cfg.schedule[i] < 2 || (i > 0 && cfg.schedule[i] <= cfg.schedule[i - 1]))
      throw ConfigError("/schedule: horizons must be >= 2 and strictly increasing");
  if (cfg.schedule.empty())
    throw ConfigError("/schedule: must not be empty");

  if (root.has("out"))
    cfg.out_dir = root.at("out").str();
  if (overrides.out)
    cfg.out_dir = *overrides.out;

  if (cfg.command == Command::falab) {
    if (!root.has("falab"))
      throw ConfigError("/falab: missing required field");
    parse_falab(root.at("falab"), cfg);
  } else {
    parse_problem(root.at("problem"), cfg);
    if (overrides.mode)
      cfg.problem = cfg.problem->with_mode(*overrides.mode);
    const int n = cfg.problem->state_dim(), m = cfg.problem->control_dim();

    if (root.has("terminal"))
      cfg.terminal = root.at("terminal").vec(n);
    if (root.has("candidate")) {
      const Node c = root.at("candidate");
      if (c.raw().is_string()) {
        if (c.str() != "oracle")
          c.fail("expected \"oracle\" or an explicit {x, u} process");
        if (!cfg.entry)
          c.fail("an oracle candidate needs a catalog problem");
        cfg.candidate.kind = CandidateSpec::Kind::oracle;
      } else {
        cfg.candidate.kind = CandidateSpec::Kind::explicit_process;
        cfg.candidate.process = parse_process(c, n, m);
      }
    } else if (cfg.entry) {
      cfg.candidate.kind = CandidateSpec::Kind::oracle;
    }
    if (cfg.command == Command::verify || cfg.command == Command::audit) {
      if (cfg.candidate.kind == CandidateSpec::Kind::none)
        throw ConfigError("/candidate: required for this command on a custom problem");
      if (cfg.candidate.kind == CandidateSpec::Kind::explicit_process)
        cfg.horizon = cfg.candidate.process.horizon();
    }
    if (root.has("multipliers")) {
      const Node mnode = root.at("multipliers");
      if (mnode.raw().is_string()) {
        const std::string k = mnode.str();
        if (k == "solver")
          cfg.multipliers.kind = MultiplierSpec::Kind::solver;
        else if (k == "oracle") {
          if (!cfg.entry)
            mnode.fail("oracle multipliers need a catalog problem");
          cfg.multipliers.kind = MultiplierSpec::Kind::oracle;
        } else if (k == "zero")
          cfg.multipliers.kind = MultiplierSpec::Kind::zero;
        else
          mnode.fail("expected solver | oracle | zero or an explicit path");
      } else {
        mnode.allow({"lambda0", "p"});
        cfg.multipliers.kind = MultiplierSpec::Kind::explicit_path;
        cfg.multipliers.path.lambda0 = mnode.at("lambda0").number();
        const Node p = mnode.at("p");
        for (std::size_t i = 0; i < p.size(); ++i)
          cfg.multipliers.path.p.push_back(p.index(i).vec(n));
      }
    }
    cfg.continuation_verify = cfg.candidate.kind != CandidateSpec::Kind::none;
    cfg.continuation.solver = cfg.solver;
    cfg.continuation.certificate_tol = cfg.tol;
    if (root.has("continuation")) {
      const Node c = root.at("continuation");
      c.allow({"mode", "window", "limit_tol", "warm_start", "parallel"});
      if (c.has("mode")) {
        const std::string mode = c.at("mode").str();
        if (mode == "verify") {
          if (cfg.candidate.kind == CandidateSpec::Kind::none)
            c.at("mode").fail("verify mode needs a candidate");
          cfg.continuation_verify = true;
        } else if (mode == "solve") {
          cfg.continuation_verify = false;
        } else {
          c.at("mode").fail("expected verify or solve");
        }
      }
      if (c.has("window"))
        cfg.continuation.limit_window = c.at("window").integer();
      if (c.has("limit_tol"))
        cfg.continuation.limit_tol = c.at("limit_tol").number();
      if (c.has("warm_start"))
        cfg.continuation.warm_start = c.at("warm_start").boolean();
      if (c.has("parallel"))
        cfg.continuation.parallel = c.at("parallel").boolean();
      if (cfg.continuation.limit_window < 2)
        c.fail("window must be at least 2");
    }
    if (cfg.command == Command::continuation && cfg.anchor_s > cfg.schedule.front())
      throw ConfigError("/anchor_s: must not exceed the smallest scheduled horizon");
    if (cfg.command != Command::continuation && cfg.anchor_s > cfg.horizon)
      throw ConfigError("/anchor_s: must not exceed the horizon");
  }

  cfg.config_hash = fnv1a_hex(doc.dump() + "|" + describe_overrides(overrides));
  return cfg;
}

} // namespace ihoc
