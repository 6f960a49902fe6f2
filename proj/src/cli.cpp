#include "ihoc/cli.hpp"

#include "ihoc/errors.hpp"
#include "ihoc/report.hpp"

#include <fmt/core.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace ihoc {

namespace fs = std::filesystem;

namespace {

struct Outcome {
  Json summary;
  std::string csv_name;
  std::string csv;
  int code = kExitPass;
};

void raise(Outcome &out, int code) {
  // non-convergence outranks certificate failure
  if (code == kExitNoConvergence || out.code == kExitPass)
    out.code = code;
}

const char *multiplier_source(MultiplierSpec::Kind k) {
  switch (k) {
  case MultiplierSpec::Kind::solver:
    return "solver";
  case MultiplierSpec::Kind::oracle:
    return "oracle";
  case MultiplierSpec::Kind::zero:
    return "zero";
  case MultiplierSpec::Kind::explicit_path:
    return "explicit";
  }
  return "?";
}

Process candidate_for(const RunConfig &cfg, int T) {
  if (cfg.candidate.kind == CandidateSpec::Kind::oracle)
    return cfg.entry->reference(T);
  if (cfg.candidate.kind == CandidateSpec::Kind::explicit_process)
    return cfg.candidate.process;
  throw ConfigError("/candidate: no candidate process available");
}

Outcome run_solve(const RunConfig &cfg) {
  Outcome out;
  const auto trace = run_continuation(*cfg.problem, SolveMode{cfg.terminal},
                                      {cfg.horizon}, cfg.anchor_s, cfg.continuation);
  const auto &rec = trace.records.front();
  out.summary["terminal_source"] = trace.terminal_source;
  out.summary["terminal_anchor"] = to_json(trace.terminal_anchor);
  out.summary["horizon"] = to_json(rec);
  if (rec.status != SolveStatus::converged)
    raise(out, kExitNoConvergence);
  else if (!rec.ok || !rec.certificate.pass)
    raise(out, kExitCertificateFailure);
  if (rec.ok) {
    std::ostringstream csv;
    write_stage_csv(csv, rec.primal, rec.path, rec.certificate);
    out.csv_name = "stages.csv";
    out.csv = csv.str();
  }
  return out;
}

Outcome run_verify(const RunConfig &cfg) {
  Outcome out;
  const ControlProblem &problem = *cfg.problem;
  const Process proc = candidate_for(cfg, cfg.horizon);
  const int T = proc.horizon();
  const auto feas = check_feasibility(problem, proc);
  Json fj;
  fj["ok"] = feas.ok(cfg.tol);
  fj["initial_gap"] = feas.initial_gap;
  fj["dynamics_gap"] = feas.dynamics_gap;
  fj["control_gap"] = feas.control_gap;
  out.summary["feasibility"] = fj;

  MultiplierPath raw;
  switch (cfg.multipliers.kind) {
  case MultiplierSpec::Kind::solver: {
    const auto tp = build_truncation(problem, T, proc.x.back());
    const auto kkt = solve_truncation(tp, make_start(tp, StartStrategy::warm, &proc),
                                      cfg.solver);
    Json sj;
    sj["status"] = to_string(kkt.status);
    sj["iterations"] = kkt.iterations;
    sj["objective"] = kkt.objective;
    sj["stationarity"] = kkt.stationarity;
    sj["feasibility"] = kkt.feasibility;
    sj["complementarity"] = kkt.complementarity;
    sj["abnormal_extraction"] = kkt.abnormal.has_value();
    out.summary["solver"] = sj;
    if (!kkt.converged()) {
      raise(out, kExitNoConvergence);
      return out;
    }
    raw = extract_multipliers(kkt, tp, cfg.solver);
    break;
  }
  case MultiplierSpec::Kind::oracle:
    raw = cfg.entry->multipliers(proc);
    break;
  case MultiplierSpec::Kind::zero:
    raw.lambda0 = 0.0;
    raw.p.assign(static_cast<std::size_t>(T + 1), Vec::Zero(problem.state_dim()));
    break;
  case MultiplierSpec::Kind::explicit_path:
    raw = cfg.multipliers.path;
    break;
  }
  out.summary["multiplier_source"] = multiplier_source(cfg.multipliers.kind);
  MultiplierPath path = raw;
  if (cfg.anchor_s <= raw.last_index() &&
      raw.lambda0 + raw.at(cfg.anchor_s).norm() > 0.0)
    path = normalize(raw, cfg.anchor_s);
  const auto cert = verify_certificate(problem, proc, path, cfg.anchor_s, cfg.tol);
  out.summary["multipliers"] = to_json(path);
  out.summary["certificate"] = to_json(cert);
  if (!cert.pass)
    raise(out, kExitCertificateFailure);
  std::ostringstream csv;
  write_stage_csv(csv, proc, path, cert);
  out.csv_name = "stages.csv";
  out.csv = csv.str();
  return out;
}

void record_trace_status(Outcome &out, const ContinuationTrace &trace) {
  for (const auto &r : trace.records) {
    if (r.status != SolveStatus::converged)
      raise(out, kExitNoConvergence);
    else if (!r.ok || !r.certificate.pass)
      raise(out, kExitCertificateFailure);
  }
}

Outcome run_continue(const RunConfig &cfg) {
  Outcome out;
  const ControlProblem &problem = *cfg.problem;
  std::optional<Process> candidate;
  ContinuationMode mode = SolveMode{cfg.terminal};
  if (cfg.continuation_verify) {
    candidate = candidate_for(cfg, cfg.schedule.back());
    mode = VerifyMode{*candidate};
  }
  const auto trace =
      run_continuation(problem, mode, cfg.schedule, cfg.anchor_s, cfg.continuation);
  const auto deg = degeneracy_monitor(trace, problem, candidate, cfg.tol, 32, cfg.seed);
  out.summary["trace"] = to_json(trace);
  out.summary["degeneracy"] = to_json(deg);
  record_trace_status(out, trace);
  std::ostringstream csv;
  write_trace_csv(csv, trace);
  out.csv_name = "trace.csv";
  out.csv = csv.str();
  return out;
}

Outcome run_audit(const RunConfig &cfg) {
  Outcome out;
  const ControlProblem &problem = *cfg.problem;
  const Process proc = candidate_for(cfg, cfg.schedule.back());
  const int s = cfg.anchor_s;

  const auto deriv = check_derivatives(problem, proc);
  out.summary["derivatives"] = to_json(deriv);
  out.summary["derivatives_ok"] = deriv.ok();

  const auto anchor = anchor_check(problem, proc, s);
  Json aj;
  aj["stage"] = anchor.stage;
  aj["span_dim"] = anchor.span_dim;
  aj["affine_codim"] = anchor.affine_codim;
  aj["relative_interior_nonempty"] = anchor.relative_interior_nonempty;
  out.summary["anchor"] = aj;

  Json codims = Json::array();
  for (int t = 0; t <= proc.horizon(); ++t) {
    const auto rc = rank_codim(problem, proc, t);
    codims.push_back(Json{{"t", t}, {"rank", rc.rank}, {"codim", rc.codim}});
  }
  out.summary["range_codim"] = codims;

  const auto trace = run_continuation(problem, VerifyMode{proc}, cfg.schedule, s,
                                      cfg.continuation);
  record_trace_status(out, trace);
  std::map<int, MultiplierPath> paths;
  for (const auto &r : trace.records)
    if (r.ok)
      paths[r.T] = r.path;
  bool bounds_ok = false;
  try {
    const auto audit =
        bound_audit(problem, proc, paths, s, cfg.direction_samples, cfg.seed);
    out.summary["bound_audit"] = to_json(audit);
    bounds_ok = audit.ok();
  } catch (const MarginZero &e) {
    out.summary["bound_audit"] =
        Json{{"ok", false}, {"error", e.what()}, {"stage", e.stage()}};
  }
  const auto deg = degeneracy_monitor(trace, problem, proc, cfg.tol, 32, cfg.seed);
  out.summary["degeneracy"] = to_json(deg);
  if (!deriv.ok() || !bounds_ok || !deg.cone_ok || !deg.normalization_ok)
    raise(out, kExitCertificateFailure);
  std::ostringstream csv;
  write_trace_csv(csv, trace);
  out.csv_name = "trace.csv";
  out.csv = csv.str();
  return out;
}

Outcome run_falab(const RunConfig &cfg) {
  Outcome out;
  const FaLabSpec &lab = cfg.falab;
  if (!lab.family_kind.empty()) {
    const auto &fam = lab.family;
    Json fj;
    fj["kind"] = lab.family_kind;
    fj["dim"] = fam.dim;
    fj["size"] = fam.size();
    fj["lambda"] = fam.lambda;
    fj["subadditivity_defect"] = subadditivity_defect(fam, 200, cfg.seed);
    fj["homogeneity_defect"] = homogeneity_defect(fam, 200, cfg.seed);
    out.summary["family"] = fj;
    if (lab.body) {
      const auto ub = uniform_bound_estimate(fam, *lab.body);
      out.summary["uniform_bound"] =
          Json{{"estimate", ub.estimate}, {"member", ub.member},
               {"probe", to_json(ub.probe)}, {"probe_radius", lab.body->probe_radius}};
      try {
        const auto res =
            lemma33_constant_search(fam, *lab.body, lab.resolution, lab.ladder_max);
        out.summary["witness_search"] = to_json(res);
        for (double m : res.margins)
          if (m < -1e-12)
            raise(out, kExitCertificateFailure);
      } catch (const NoWitnessFound &e) {
        // the grid may miss a witness that exists
        out.summary["witness_search"] = Json{{"found", false}, {"error", e.what()}};
      }
    }
  }
  if (!lab.operators.empty()) {
    const auto audit = operator_norm_audit(lab.operators, lab.operator_probes);
    out.summary["operator_norms"] = to_json(audit);
    if (!audit.consistent)
      raise(out, kExitCertificateFailure);
  }
  return out;
}

void write_file(const fs::path &path, const std::string &bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f)
    throw Error(fmt::format("cannot write {}", path.string()));
  f << bytes;
}

} // namespace

int run(const RunConfig &cfg, std::ostream &log) {
  Outcome out;
  switch (cfg.command) {
  case Command::solve:
    out = run_solve(cfg);
    break;
  case Command::verify:
    out = run_verify(cfg);
    break;
  case Command::continuation:
    out = run_continue(cfg);
    break;
  case Command::audit:
    out = run_audit(cfg);
    break;
  case Command::falab:
    out = run_falab(cfg);
    break;
  }

  Json summary = report_header(to_string(cfg.command),
                               cfg.command == Command::falab ? "falab" : cfg.problem_name,
                               cfg.config_hash);
  summary["seed"] = cfg.seed;
  summary["tol"] = cfg.tol;
  if (cfg.problem) {
    summary["mode"] = to_string(cfg.problem->mode());
    summary["anchor_s"] = cfg.anchor_s;
    summary["limitations"] = Json::array(
        {"the checked conditions are necessary for every overtaking criterion "
         "at once and do not tell them apart",
         "complementary slackness is a solver diagnostic, not a checked condition"});
  }
  for (auto it = out.summary.begin(); it != out.summary.end(); ++it)
    summary[it.key()] = it.value();
  summary["exit_code"] = out.code;
  summary["pass"] = out.code == kExitPass;

  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  if (!out.csv_name.empty())
    write_file(dir / out.csv_name, out.csv);
  log << fmt::format("{} {}: {} (exit {})\n", to_string(cfg.command),
                     summary["problem"].get<std::string>(),
                     out.code == kExitPass ? "pass" : "fail", out.code);
  return out.code;
}

int run_from_text(const std::string &text, const CliOverrides &overrides,
                  std::ostream &log) {
  RunConfig cfg;
  try {
    cfg = parse_config(text, overrides);
  } catch (const ConfigError &e) {
    log << "configuration error: " << e.what() << '\n';
    return kExitConfigError;
  }
  try {
    return run(cfg, log);
  } catch (const ConfigError &e) {
    log << "configuration error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const NoConvergence &e) {
    log << "no convergence: " << e.what() << '\n';
    return kExitNoConvergence;
  } catch (const ConditionViolation &e) {
    log << fmt::format("condition violated at t = {}: {}\n", e.stage(), e.what());
    return kExitCertificateFailure;
  } catch (const std::exception &e) {
    log << "error: " << e.what() << '\n';
    return kExitConfigError;
  }
}

int run_from_file(const std::string &path, const CliOverrides &overrides,
                  std::ostream &log) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    log << "configuration error: cannot read " << path << '\n';
    return kExitConfigError;
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  return run_from_text(ss.str(), overrides, log);
}

} // namespace ihoc
