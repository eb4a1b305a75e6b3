#pragma once

#include <string>
#include <vector>

#include "fgmpc/polytope.hpp"

namespace fgmpc {

/// Text H-rep: a `#hrep dim=<n> rows=<m>` header, optional `#` comment lines,
/// then one row `a_1 ... a_n b` per line meaning a'x <= b.
/// `column_names`, when given, is written as a `# columns:` comment.
std::string format_hrep(const HPolyhedron& P, const std::vector<std::string>& column_names = {});

/// Inverse of format_hrep. Errors name the offending line.
HPolyhedron parse_hrep(const std::string& text);

void write_hrep(const std::string& path, const HPolyhedron& P,
                const std::vector<std::string>& column_names = {});
HPolyhedron read_hrep(const std::string& path);

/// Writes to a temporary sibling and renames it over `path`, so readers never
/// observe a partial file.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace fgmpc
