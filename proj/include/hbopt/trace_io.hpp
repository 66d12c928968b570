#pragma once

#include "hbopt/schemes.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace hbopt {

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double value);

/// Header `n,f_gap,step_norm,dist_opt,wall_ns`; an absent dist_opt is an
/// empty field.
void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& records);
std::string trace_csv(const std::vector<TraceRecord>& records);

/// Run metadata sidecar: {scheme, params, seed, problem_hash}.
nlohmann::json run_metadata(const RunResult& run, std::uint64_t seed, const std::string& problem_hash);

/// Writes to `<path>.tmp` and renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace hbopt
