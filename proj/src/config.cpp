#include "specforge/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "specforge/errors.hpp"

namespace specforge::cli {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

IniFile IniFile::parse(std::istream& in, const std::string& origin) {
    IniFile ini;
    std::string line;
    std::string current;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // strip comments (full-line or trailing, outside of values we keep
        // it simple: '#' anywhere starts a comment)
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": unterminated section header");
            current = trim(t.substr(1, t.size() - 2));
            if (current.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": empty section name");
            ini.find_or_add(current);
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected 'key = value'");
        if (current.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": key outside of any [section]");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": empty key");
        ini.find_or_add(current).entries.emplace_back(key, value);
    }
    return ini;
}

IniFile IniFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    return parse(in, path);
}

const IniFile::Section* IniFile::find(const std::string& name) const {
    for (const auto& s : sections_)
        if (s.name == name) return &s;
    return nullptr;
}

IniFile::Section& IniFile::find_or_add(const std::string& name) {
    for (auto& s : sections_)
        if (s.name == name) return s;
    sections_.push_back({name, {}});
    return sections_.back();
}

bool IniFile::has_section(const std::string& section) const {
    return find(section) != nullptr;
}

std::vector<std::string> IniFile::section_names() const {
    std::vector<std::string> out;
    out.reserve(sections_.size());
    for (const auto& s : sections_) out.push_back(s.name);
    return out;
}

std::optional<std::string> IniFile::get(const std::string& section,
                                        const std::string& key) const {
    const Section* s = find(section);
    if (!s) return std::nullopt;
    for (const auto& [k, v] : s->entries)
        if (k == key) return v;
    return std::nullopt;
}

std::string IniFile::require(const std::string& section,
                             const std::string& key) const {
    auto v = get(section, key);
    if (!v)
        throw ConfigError("missing config key [" + section + "] " + key);
    return *v;
}

std::string IniFile::get_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
    return get(section, key).value_or(fallback);
}

double IniFile::get_double(const std::string& section, const std::string& key,
                           double fallback) const {
    auto v = get(section, key);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        const double d = std::stod(*v, &used);
        if (used != v->size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key [" + section + "] " + key +
                          ": not a number: '" + *v + "'");
    }
}

double IniFile::require_double(const std::string& section,
                               const std::string& key) const {
    require(section, key);
    return get_double(section, key, 0.0);
}

std::size_t IniFile::get_size(const std::string& section, const std::string& key,
                              std::size_t fallback) const {
    auto v = get(section, key);
    if (!v) return fallback;
    try {
        const long long d = std::stoll(*v);
        if (d < 0) throw std::invalid_argument("negative");
        return static_cast<std::size_t>(d);
    } catch (const std::exception&) {
        throw ConfigError("config key [" + section + "] " + key +
                          ": not a non-negative integer: '" + *v + "'");
    }
}

bool IniFile::get_bool(const std::string& section, const std::string& key,
                       bool fallback) const {
    auto v = get(section, key);
    if (!v) return fallback;
    std::string s = *v;
    std::transform(s.begin(), s.end(), s.begin(), ::tolower);
    if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return false;
    throw ConfigError("config key [" + section + "] " + key +
                      ": not a boolean: '" + *v + "'");
}

std::vector<double> IniFile::get_double_list(const std::string& section,
                                             const std::string& key) const {
    return parse_double_list(require(section, key),
                             "[" + section + "] " + key);
}

std::vector<std::size_t> IniFile::get_size_list(const std::string& section,
                                                const std::string& key) const {
    return parse_size_list(require(section, key), "[" + section + "] " + key);
}

void IniFile::set(const std::string& section, const std::string& key,
                  const std::string& value) {
    auto& s = find_or_add(section);
    for (auto& [k, v] : s.entries)
        if (k == key) {
            v = value;
            return;
        }
    s.entries.emplace_back(key, value);
}

std::string IniFile::normalized() const {
    std::ostringstream out;
    for (const auto& s : sections_) {
        out << '[' << s.name << "]\n";
        for (const auto& [k, v] : s.entries) out << k << " = " << v << '\n';
        out << '\n';
    }
    return out.str();
}

std::vector<diagrams::PhasePair> parse_phase_spec(const std::string& text) {
    std::vector<diagrams::PhasePair> out;
    std::size_t pos = 0;
    const auto skip = [&] {
        while (pos < text.size() &&
               (std::isspace(static_cast<unsigned char>(text[pos])) ||
                text[pos] == ','))
            ++pos;
    };
    skip();
    while (pos < text.size()) {
        if (text[pos] != '(')
            throw ConfigError("phase spec: expected '(' at position " +
                              std::to_string(pos) + " in '" + text + "'");
        const auto close = text.find(')', pos);
        if (close == std::string::npos)
            throw ConfigError("phase spec: unterminated pair in '" + text + "'");
        const std::string body = text.substr(pos + 1, close - pos - 1);
        const auto comma = body.find(',');
        if (comma == std::string::npos)
            throw ConfigError("phase spec: pair needs two entries in '" + text +
                              "'");
        try {
            diagrams::PhasePair p;
            p.n_minus = static_cast<unsigned>(std::stoul(trim(body.substr(0, comma))));
            p.n_plus = static_cast<unsigned>(std::stoul(trim(body.substr(comma + 1))));
            out.push_back(p);
        } catch (const std::exception&) {
            throw ConfigError("phase spec: bad pair '(" + body + ")'");
        }
        pos = close + 1;
        skip();
    }
    if (out.empty()) throw ConfigError("phase spec: empty");
    return out;
}

std::vector<double> parse_double_list(const std::string& text,
                                      const std::string& what) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        const std::string t = trim(tok);
        if (t.empty()) continue;
        try {
            out.push_back(std::stod(t));
        } catch (const std::exception&) {
            throw ConfigError(what + ": not a number: '" + t + "'");
        }
    }
    if (out.empty()) throw ConfigError(what + ": empty list");
    return out;
}

std::vector<std::size_t> parse_size_list(const std::string& text,
                                         const std::string& what) {
    std::vector<std::size_t> out;
    for (double d : parse_double_list(text, what)) {
        if (d < 0 || d != static_cast<double>(static_cast<std::size_t>(d)))
            throw ConfigError(what + ": expected non-negative integers");
        out.push_back(static_cast<std::size_t>(d));
    }
    return out;
}

}  // namespace specforge::cli
