#include "ihoc/report.hpp"

#include <fmt/core.h>

#include <cmath>

namespace ihoc {

namespace {

Json number(double v) {
  if (!std::isfinite(v))
    return Json(nullptr);
  return Json(v);
}

Json numbers(const std::vector<double> &vs) {
  Json a = Json::array();
  for (double v : vs)
    a.push_back(number(v));
  return a;
}

Json ints(const std::vector<int> &vs) {
  Json a = Json::array();
  for (int v : vs)
    a.push_back(v);
  return a;
}

} // namespace

Json report_header(const std::string &command, const std::string &problem,
                   const std::string &config_hash) {
  Json j;
  j["schema"] = kReportSchema;
  j["config_hash"] = config_hash;
  j["command"] = command;
  j["problem"] = problem;
  return j;
}

Json to_json(const Vec &v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    a.push_back(number(v(i)));
  return a;
}

Json to_json(const VecSeq &vs) {
  Json a = Json::array();
  for (const auto &v : vs)
    a.push_back(to_json(v));
  return a;
}

Json to_json(const MultiplierPath &path) {
  Json j;
  j["lambda0"] = number(path.lambda0);
  j["p"] = to_json(path.p);
  j["normalized_at"] = path.normalized_at ? Json(*path.normalized_at) : Json(nullptr);
  j["scale"] = number(path.scale());
  return j;
}

Json to_json(const Certificate &cert) {
  Json j;
  j["pass"] = cert.pass;
  j["horizon"] = cert.horizon;
  j["anchor_s"] = cert.anchor_s;
  j["mode"] = to_string(cert.mode);
  j["tol"] = cert.tol;
  j["lambda0"] = number(cert.lambda0);
  j["scale"] = number(cert.scale);
  Json verdicts;
  verdicts["nontriviality"] = cert.nontrivial_ok;
  verdicts["sign"] = cert.sign_ok;
  verdicts["adjoint"] = cert.adjoint_ok;
  verdicts["variational_inequality"] = cert.vi_ok;
  j["verdicts"] = verdicts;
  Json failures;
  failures["nontriviality"] = ints(cert.nontrivial_failures);
  failures["sign"] = ints(cert.sign_failures);
  failures["adjoint"] = ints(cert.adjoint_failures);
  failures["variational_inequality"] = ints(cert.vi_failures);
  j["failures"] = failures;
  Json res;
  res["adjoint_t1"] = numbers(cert.adjoint);
  res["vi_t0"] = numbers(cert.vi);
  res["margin_t1"] = numbers(cert.margin);
  res["positivity_t1"] = numbers(cert.positivity);
  j["residuals"] = res;
  j["worst_adjoint"] = number(cert.worst_adjoint());
  j["worst_vi"] = number(cert.worst_vi());
  return j;
}

Json to_json(const LimitResult &limit) {
  Json j;
  j["converged"] = limit.converged;
  j["window"] = limit.window;
  j["tol"] = limit.tol;
  j["lambda0"] = number(limit.limit.lambda0);
  j["p"] = to_json(limit.limit.p);
  j["lambda0_converged"] = limit.lambda0_converged;
  j["converged_stages"] = ints(limit.converged_stages);
  j["unconverged_stages"] = ints(limit.unconverged_stages);
  j["amplitude"] = number(limit.amplitude);
  j["worst_stage"] = limit.worst_stage;
  return j;
}

Json to_json(const HorizonRecord &rec) {
  Json j;
  j["T"] = rec.T;
  j["ok"] = rec.ok;
  if (!rec.error.empty())
    j["error"] = rec.error;
  j["status"] = to_string(rec.status);
  j["iterations"] = rec.iterations;
  j["objective"] = number(rec.objective);
  j["stationarity"] = number(rec.stationarity);
  j["feasibility"] = number(rec.feasibility);
  // complementary slackness is an extra solver-quality diagnostic
  j["complementarity"] = number(rec.complementarity);
  j["abnormal_extraction"] = rec.abnormal_extraction;
  if (rec.ok) {
    j["multipliers"] = to_json(rec.path);
    j["certificate"] = to_json(rec.certificate);
  }
  return j;
}

Json to_json(const ContinuationTrace &trace) {
  Json j;
  j["anchor_s"] = trace.anchor_s;
  j["mode"] = trace.verify_mode ? "verify" : "solve";
  j["terminal_source"] = trace.terminal_source;
  if (!trace.verify_mode)
    j["terminal_anchor"] = to_json(trace.terminal_anchor);
  j["horizons"] = ints(trace.horizons);
  Json recs = Json::array();
  for (const auto &r : trace.records)
    recs.push_back(to_json(r));
  j["records"] = recs;
  j["limit"] = trace.limit ? to_json(*trace.limit) : Json(nullptr);
  return j;
}

Json to_json(const DegeneracyReport &rep) {
  Json j;
  j["normalization_ok"] = rep.normalization_ok;
  j["worst_normalization"] = number(rep.worst_normalization);
  j["bounds_ok"] = rep.bounds_ok;
  j["cone_ok"] = rep.cone_ok;
  j["abnormal"] = rep.abnormal;
  j["limit_margin"] = number(rep.limit_margin);
  j["margin_ok"] = rep.margin_ok;
  j["unconverged_stages"] = ints(rep.unconverged_stages);
  j["failed_horizons"] = ints(rep.failed_horizons);
  Json audits = Json::array();
  for (const auto &a : rep.audits) {
    Json h;
    h["T"] = a.T;
    h["bound_ok"] = a.bound_ok;
    h["min_slack"] = number(a.min_slack);
    h["cone_ok"] = a.cone_ok;
    h["cone_worst"] = number(a.cone_worst);
    if (!a.error.empty())
      h["error"] = a.error;
    audits.push_back(h);
  }
  j["audits"] = audits;
  return j;
}

Json to_json(const BoundAudit &audit) {
  Json j;
  j["anchor_s"] = audit.anchor_s;
  j["ok"] = audit.ok();
  j["min_slack"] = number(audit.min_slack);
  j["margins"] = numbers(audit.margins);
  j["a"] = numbers(audit.a);
  j["b"] = numbers(audit.b);
  Json slack;
  for (const auto &[T, s] : audit.slack)
    slack[std::to_string(T)] = numbers(s);
  j["slack"] = slack;
  return j;
}

Json to_json(const DerivativeReport &rep) {
  Json j;
  j["step"] = rep.step;
  j["worst"] = number(rep.worst());
  Json stages = Json::array();
  for (const auto &s : rep.stages) {
    Json e;
    e["t"] = s.t;
    e["dyn_x"] = number(s.dyn_x);
    e["dyn_u"] = number(s.dyn_u);
    e["reward_x"] = number(s.reward_x);
    e["reward_u"] = number(s.reward_u);
    stages.push_back(e);
  }
  j["stages"] = stages;
  return j;
}

Json to_json(const Lemma33Result &res) {
  Json j;
  j["witness"] = to_json(res.witness);
  j["constant"] = number(res.constant);
  j["margins"] = numbers(res.margins);
  j["sup_over_probes"] = numbers(res.sup_over_probes);
  j["candidates"] = res.candidates;
  j["premise_ok"] = res.premise_ok;
  return j;
}

Json to_json(const OperatorNormAudit &audit) {
  Json j;
  j["uniform"] = number(audit.uniform);
  j["argmax"] = audit.argmax;
  j["consistent"] = audit.consistent;
  j["pointwise"] = numbers(audit.pointwise);
  return j;
}

std::string format_number(double v) {
  if (std::isnan(v))
    return "nan";
  return fmt::format("{:.17g}", v);
}

namespace {

void append(std::string &row, double v) {
  row += ',';
  row += format_number(v);
}

void append_vec(std::string &row, const Vec &v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    append(row, v(i));
}

double entry_or_nan(const std::vector<double> &v, int i) {
  return i >= 0 && i < static_cast<int>(v.size()) ? v[static_cast<std::size_t>(i)]
                                                  : std::nan("");
}

std::string column_list(const std::string &name, Eigen::Index count) {
  std::string s;
  for (Eigen::Index i = 0; i < count; ++i)
    s += fmt::format(",{}{}", name, i);
  return s;
}

} // namespace

void write_stage_csv(std::ostream &os, const Process &proc,
                     const MultiplierPath &path, const Certificate &cert) {
  const Eigen::Index n = proc.x.front().size(), m = proc.u.front().size();
  os << "t" << column_list("x", n) << column_list("u", m) << ",lambda0"
     << column_list("p", n) << ",adjoint,vi,margin,positivity\n";
  const int T = proc.horizon();
  for (int t = 0; t <= T + 1; ++t) {
    std::string row = std::to_string(t);
    append_vec(row, proc.x[static_cast<std::size_t>(t)]);
    if (t <= T)
      append_vec(row, proc.u[static_cast<std::size_t>(t)]);
    else
      append_vec(row, Vec::Constant(m, std::nan("")));
    append(row, path.lambda0);
    if (t >= 1 && t <= path.last_index())
      append_vec(row, path.at(t));
    else
      append_vec(row, Vec::Constant(n, std::nan("")));
    append(row, entry_or_nan(cert.adjoint, t - 1));
    append(row, entry_or_nan(cert.vi, t));
    append(row, entry_or_nan(cert.margin, t - 1));
    append(row, entry_or_nan(cert.positivity, t - 1));
    os << row << '\n';
  }
}

void write_trace_csv(std::ostream &os, const ContinuationTrace &trace) {
  Eigen::Index n = 0;
  for (const auto &r : trace.records)
    if (r.ok && !r.path.p.empty())
      n = r.path.p.front().size();
  os << "T,t,lambda0" << column_list("p", n) << ",norm_p,adjoint,vi,margin\n";
  for (const auto &r : trace.records) {
    if (!r.ok)
      continue;
    for (int t = 1; t <= r.path.last_index(); ++t) {
      std::string row = fmt::format("{},{}", r.T, t);
      append(row, r.path.lambda0);
      append_vec(row, r.path.at(t));
      append(row, r.path.at(t).norm());
      append(row, entry_or_nan(r.certificate.adjoint, t - 1));
      append(row, entry_or_nan(r.certificate.vi, t));
      append(row, entry_or_nan(r.certificate.margin, t - 1));
      os << row << '\n';
    }
  }
}

} // namespace ihoc
