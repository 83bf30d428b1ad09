#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace stencilstream {

// Entry point of the command-line tool. args excludes the program name;
// env_out is the value of STENCILSTREAM_OUT, if set. Failures print a single
// `error: <category>: <message>` line to err and return the category's exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const std::optional<std::string>& env_out = std::nullopt);

// Grids above this many interior cells need --allow-large.
constexpr std::size_t large_config_cells = std::size_t{256} * 256 * 256;

} // namespace stencilstream
