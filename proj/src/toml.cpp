#include "enslab/toml.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

#include "enslab/errors.hpp"

namespace enslab {

namespace {

struct Cursor {
    const std::string& s;
    std::size_t i = 0;
    int line;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("config line " + std::to_string(line) + ": " + msg);
    }
    void skip_ws() {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r' || s[i] == '\n')) ++i;
        if (i < s.size() && s[i] == '#') i = s.size();
    }
    bool done() {
        skip_ws();
        return i >= s.size();
    }
};

std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_str = !in_str;
        if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string parse_string(Cursor& c) {
    ++c.i;
    std::string out;
    while (c.i < c.s.size() && c.s[c.i] != '"') {
        if (c.s[c.i] == '\\' && c.i + 1 < c.s.size()) {
            const char e = c.s[++c.i];
            out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
        } else {
            out += c.s[c.i];
        }
        ++c.i;
    }
    if (c.i >= c.s.size()) c.fail("unterminated string");
    ++c.i;
    return out;
}

double parse_number(Cursor& c) {
    std::size_t j = c.i;
    while (j < c.s.size() && (std::isalnum(static_cast<unsigned char>(c.s[j])) || c.s[j] == '.' ||
                              c.s[j] == '-' || c.s[j] == '+' || c.s[j] == '_'))
        ++j;
    std::string tok = c.s.substr(c.i, j - c.i);
    std::erase(tok, '_');
    if (!tok.empty() && tok[0] == '+') tok.erase(0, 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) c.fail("bad value '" + tok + "'");
    c.i = j;
    return v;
}

TomlValue parse_value(Cursor& c) {
    c.skip_ws();
    if (c.i >= c.s.size()) c.fail("missing value");
    const char ch = c.s[c.i];
    if (ch == '"') return parse_string(c);
    if (c.s.compare(c.i, 4, "true") == 0) {
        c.i += 4;
        return true;
    }
    if (c.s.compare(c.i, 5, "false") == 0) {
        c.i += 5;
        return false;
    }
    if (ch == '[') {
        ++c.i;
        std::vector<double> nums;
        std::vector<std::string> strs;
        for (;;) {
            c.skip_ws();
            if (c.i >= c.s.size()) c.fail("unterminated array");
            if (c.s[c.i] == ']') {
                ++c.i;
                break;
            }
            if (c.s[c.i] == '"') {
                if (!nums.empty()) c.fail("mixed array");
                strs.push_back(parse_string(c));
            } else if (c.s[c.i] == '[' || c.s[c.i] == '{') {
                c.fail("nested arrays and inline tables are not supported");
            } else {
                if (!strs.empty()) c.fail("mixed array");
                nums.push_back(parse_number(c));
            }
            c.skip_ws();
            if (c.i < c.s.size() && c.s[c.i] == ',') ++c.i;
        }
        if (!strs.empty()) return strs;
        return nums;
    }
    if (ch == '{') c.fail("inline tables are not supported");
    return parse_number(c);
}

int bracket_balance(const std::string& s) {
    int depth = 0;
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
        if (in_str) continue;
        if (s[i] == '[') ++depth;
        if (s[i] == ']') --depth;
    }
    return depth;
}

}  // namespace

TomlDoc parse_toml(const std::string& text) {
    TomlDoc doc;
    doc[""];
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const int start = lineno;
        std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw ConfigError("config line " + std::to_string(lineno) + ": bad section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.find_first_of("[]. \t\"") != std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) + ": unsupported section name");
            if (doc.count(section) && !doc[section].empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": duplicate section [" + section + "]");
            doc[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        std::string value = line.substr(eq + 1);
        while (bracket_balance(value) > 0 && std::getline(in, raw)) {
            ++lineno;
            value += "\n" + strip_comment(raw);
        }
        if (key.empty() || key.find_first_of(". \t\"") != std::string::npos)
            throw ConfigError("config line " + std::to_string(start) + ": unsupported key '" + key + "'");
        Cursor c{value, 0, start};
        TomlValue v = parse_value(c);
        if (!c.done()) c.fail("trailing characters after value");
        auto& table = doc[section];
        if (table.count(key)) c.fail("duplicate key '" + key + "'");
        table.emplace(key, std::move(v));
    }
    return doc;
}

}  // namespace enslab
