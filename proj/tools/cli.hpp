#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vef/mesh.hpp"

namespace vef::cli {

enum ExitCode { kOk = 0, kSolverFailure = 1, kUsage = 2 };

/// cart:NXxNY[:order] on [0,1]², tg:N (Taylor-Green MMS mesh), sine:N:alpha[:order],
/// or a path to a mesh file.
Mesh parse_mesh_spec(const std::string& spec);

/// "2", "1..3" or "1,2,4" (ranges inclusive).
std::vector<int> parse_int_list(const std::string& s);
std::vector<double> parse_double_list(const std::string& s);

/// Parses argv, runs the subcommand and maps failures onto ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::string version_string();

}  // namespace vef::cli
