#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "specforge/config.hpp"
#include "specforge/response.hpp"

namespace specforge::cli {

// One [diagrams ...] group resolved to concrete diagrams.
struct DiagramGroup {
    std::string name;
    std::vector<diagrams::Diagram> diagrams;
    std::string quadrant = "none";  // none | rephasing | nonrephasing
};

std::vector<DiagramGroup> resolve_diagram_groups(const IniFile& ini);

// Builds the system, runs the scan stage per the config, writes grid and
// spectrum directories plus optional heatmaps into [output] directory.
// Returns the paths written. jobs = 0 keeps the config/default job count.
std::vector<std::string> run_pipeline(const std::string& config_path,
                                      std::size_t jobs, std::ostream& log);
std::vector<std::string> run_pipeline(const IniFile& ini, std::size_t jobs,
                                      std::ostream& log);

}  // namespace specforge::cli
