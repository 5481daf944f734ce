#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "specforge/diagrams.hpp"

namespace specforge::cli {

// Flat-sectioned key/value config. '#' and ';' start comments; values keep
// internal whitespace. Section and key order is preserved for the
// normalized echo.
class IniFile {
public:
    static IniFile parse(std::istream& in, const std::string& origin);
    static IniFile parse_file(const std::string& path);

    bool has_section(const std::string& section) const;
    std::vector<std::string> section_names() const;  // in file order

    std::optional<std::string> get(const std::string& section,
                                   const std::string& key) const;
    std::string require(const std::string& section, const std::string& key) const;

    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key,
                      double fallback) const;
    double require_double(const std::string& section, const std::string& key) const;
    std::size_t get_size(const std::string& section, const std::string& key,
                         std::size_t fallback) const;
    bool get_bool(const std::string& section, const std::string& key,
                  bool fallback) const;
    std::vector<double> get_double_list(const std::string& section,
                                        const std::string& key) const;
    std::vector<std::size_t> get_size_list(const std::string& section,
                                           const std::string& key) const;

    void set(const std::string& section, const std::string& key,
             const std::string& value);

    // Canonical text: sections and keys in original order, "key = value".
    std::string normalized() const;

private:
    struct Section {
        std::string name;
        std::vector<std::pair<std::string, std::string>> entries;
    };
    std::vector<Section> sections_;

    const Section* find(const std::string& name) const;
    Section& find_or_add(const std::string& name);
};

// "(1,0),(0,1),(0,1)" -> phase pairs
std::vector<diagrams::PhasePair> parse_phase_spec(const std::string& text);

std::vector<double> parse_double_list(const std::string& text,
                                      const std::string& what);
std::vector<std::size_t> parse_size_list(const std::string& text,
                                         const std::string& what);

}  // namespace specforge::cli
