#pragma once

// Model files.
//
// A small, strict subset of TOML. Two kinds are accepted:
//
//   kind = "jackson"
//   lambda1 = 0.1
//   lambda2 = 0.1
//   sigma1 = 0.4
//   sigma2 = 0.4
//   q1 = 0.5
//   q2 = 0.5
//
//   kind = "general"
//   renormalize = false        # optional
//   [origin]
//   "0,0" = 0.8
//   "1,0" = 0.1
//   "0,1" = 0.1
//   [face1]
//   ...
//   [face2]
//   ...
//   [interior]
//   ...
//
// Offset keys are "dx,dy" with components in {-1,0,1}. Unknown keys,
// duplicate keys and missing tables are parse errors.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "rrwqbd/model.hpp"

namespace rrwqbd {

class ModelParseError : public std::runtime_error {
public:
    ModelParseError(int line, int column, const std::string& what);

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

struct ModelFile {
    std::string kind;
    std::optional<JacksonParams> jackson;
    RandomWalkSpec spec;
};

ModelFile parse_model(std::string_view text);
ModelFile load_model(const std::filesystem::path& path);

/// Inverse of parse_model for the general kind (values printed with 17
/// significant digits).
std::string format_general_model(const RandomWalkSpec& spec);

}  // namespace rrwqbd
