#include "hbopt/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace hbopt {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& records) {
  out << "n,f_gap,step_norm,dist_opt,wall_ns\n";
  for (const auto& r : records) {
    out << r.n << ',' << format_double(r.f_gap) << ',' << format_double(r.step_norm) << ',';
    if (r.dist_opt) out << format_double(*r.dist_opt);
    out << ',' << r.wall_ns << '\n';
  }
}

std::string trace_csv(const std::vector<TraceRecord>& records) {
  std::ostringstream out;
  write_trace_csv(out, records);
  return out.str();
}

nlohmann::json run_metadata(const RunResult& run, std::uint64_t seed, const std::string& problem_hash) {
  const SchemeConfig& cfg = run.config;
  nlohmann::json params;
  params["step"] = run.step;
  params["max_iter"] = cfg.max_iter;
  params["stop_gap"] = cfg.stop_gap;
  params["stop_residual"] = cfg.stop_residual;
  switch (cfg.kind) {
    case SchemeKind::kVFista: params["alpha"] = cfg.alpha; break;
    case SchemeKind::kFistaCD: params["cd_alpha"] = cfg.cd_alpha; break;
    case SchemeKind::kFistaRestart:
      if (cfg.restart_period) params["restart_period"] = *cfg.restart_period;
      break;
    default: break;
  }
  nlohmann::json doc;
  doc["scheme"] = to_string(cfg.kind);
  doc["params"] = std::move(params);
  doc["seed"] = seed;
  doc["problem_hash"] = problem_hash;
  doc["iterations"] = run.records.empty() ? 0 : run.records.back().n;
  doc["stop_reason"] = to_string(run.stop_reason);
  return doc;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw InvalidArgument("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw InvalidArgument("cannot rename onto " + path.string());
  }
}

}  // namespace hbopt
