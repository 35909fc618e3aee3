// Pipeline dispatch: executes a parsed run configuration and writes the
// result bundle (manifest + CSV series) into the output directory.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "ionrot/config.hpp"

namespace ionrot {

struct ResultBundle {
  std::map<std::string, double> summary;
  std::vector<std::string> files;
  std::string manifest_path;
};

ResultBundle run(const RunConfig& cfg, const std::string& config_text);

} // namespace ionrot
