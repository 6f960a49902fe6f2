#pragma once

#include "ihoc/assumptions.hpp"
#include "ihoc/continuation.hpp"
#include "ihoc/fa_lab.hpp"
#include "ihoc/pontryagin.hpp"

#include <json.hpp>

#include <ostream>
#include <string>

namespace ihoc {

using Json = nlohmann::ordered_json;

inline constexpr const char *kReportSchema = "ihoc.report/1";

/// Top-level object every report starts from.
Json report_header(const std::string &command, const std::string &problem,
                   const std::string &config_hash);

Json to_json(const Vec &v);
Json to_json(const VecSeq &vs);
Json to_json(const MultiplierPath &path);
Json to_json(const Certificate &cert);
Json to_json(const LimitResult &limit);
Json to_json(const HorizonRecord &rec);
Json to_json(const ContinuationTrace &trace);
Json to_json(const DegeneracyReport &rep);
Json to_json(const BoundAudit &audit);
Json to_json(const DerivativeReport &rep);
Json to_json(const Lemma33Result &res);
Json to_json(const OperatorNormAudit &audit);

/// Fixed-precision number formatting shared by the CSV writers.
std::string format_number(double v);

/// One row per stage t = 0..T+1: states, controls, multipliers, residuals.
void write_stage_csv(std::ostream &os, const Process &proc,
                     const MultiplierPath &path, const Certificate &cert);

/// One row per (horizon, stage) of a continuation trace.
void write_trace_csv(std::ostream &os, const ContinuationTrace &trace);

} // namespace ihoc
