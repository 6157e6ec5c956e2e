#include "diffcomp/text_config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "diffcomp/errors.hpp"

namespace diffcomp::harness {

namespace {

struct Lexer {
    const std::string& text;
    const std::string& origin;
    std::size_t pos = 0;
    int line = 1;

    [[noreturn]] void fail(const std::string& what) const {
        throw SpecError(origin + ":" + std::to_string(line) + ": " + what);
    }

    void skip_space() {
        while (pos < text.size()) {
            const char c = text[pos];
            if (c == '\n') {
                ++line;
                ++pos;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos;
            } else if (c == '#') {
                while (pos < text.size() && text[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
    }

    bool eof() {
        skip_space();
        return pos >= text.size();
    }

    char peek() {
        skip_space();
        return pos < text.size() ? text[pos] : '\0';
    }

    std::string bare_token() {
        skip_space();
        std::size_t start = pos;
        while (pos < text.size()) {
            const char c = text[pos];
            if (std::isspace(static_cast<unsigned char>(c)) || c == '{' || c == '}' ||
                c == '[' || c == ']' || c == ',' || c == '#')
                break;
            ++pos;
        }
        if (pos == start) fail("expected a token");
        return text.substr(start, pos - start);
    }
};

ConfigBlock parse_block(Lexer& lex, bool top_level);

ConfigValue parse_value(Lexer& lex) {
    ConfigValue v;
    const char c = lex.peek();
    if (c == '{') {
        ++lex.pos;
        v.kind = ConfigValue::Kind::Block;
        v.block = parse_block(lex, false);
        return v;
    }
    if (c == '[') {
        ++lex.pos;
        v.kind = ConfigValue::Kind::List;
        while (true) {
            const char d = lex.peek();
            if (d == ']') {
                ++lex.pos;
                break;
            }
            if (d == ',') {
                ++lex.pos;
                continue;
            }
            if (d == '\0') lex.fail("unterminated list");
            const std::string tok = lex.bare_token();
            char* end = nullptr;
            const double num = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str() || *end != '\0')
                lex.fail("lists hold numbers only, got '" + tok + "'");
            v.list.push_back(num);
        }
        return v;
    }
    if (c == '}' || c == ']' || c == ',' || c == '\0') lex.fail("expected a value");
    v.kind = ConfigValue::Kind::Scalar;
    v.scalar = lex.bare_token();
    return v;
}

ConfigBlock parse_block(Lexer& lex, bool top_level) {
    ConfigBlock block;
    while (true) {
        const char c = lex.peek();
        if (c == '\0') {
            if (!top_level) lex.fail("unterminated block");
            return block;
        }
        if (c == '}') {
            if (top_level) lex.fail("unmatched '}'");
            ++lex.pos;
            return block;
        }
        if (c == '{' || c == '[' || c == ']' || c == ',')
            lex.fail("expected a key before punctuation");
        std::string key = lex.bare_token();
        block.emplace_back(std::move(key), parse_value(lex));
    }
}

} // namespace

ConfigBlock parse_config(const std::string& text, const std::string& origin) {
    Lexer lex{text, origin};
    return parse_block(lex, true);
}

ConfigBlock parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("cannot open configuration file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

const ConfigValue* find_key(const ConfigBlock& block, const std::string& key) {
    for (const auto& [k, v] : block)
        if (k == key) return &v;
    return nullptr;
}

namespace {
const ConfigValue& require_key(const ConfigBlock& block, const std::string& key,
                               const std::string& origin, ConfigValue::Kind kind,
                               const char* shape) {
    const ConfigValue* v = find_key(block, key);
    if (!v) throw SpecError(origin + ": missing required key '" + key + "'");
    if (v->kind != kind)
        throw SpecError(origin + ": key '" + key + "' must be a " + shape);
    return *v;
}
} // namespace

std::string require_string(const ConfigBlock& block, const std::string& key,
                           const std::string& origin) {
    return require_key(block, key, origin, ConfigValue::Kind::Scalar, "single value").scalar;
}

double require_number(const ConfigBlock& block, const std::string& key,
                      const std::string& origin) {
    const std::string s =
        require_key(block, key, origin, ConfigValue::Kind::Scalar, "number").scalar;
    char* end = nullptr;
    const double num = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw SpecError(origin + ": key '" + key + "' must be a number, got '" + s + "'");
    return num;
}

std::vector<double> require_list(const ConfigBlock& block, const std::string& key,
                                 const std::string& origin) {
    return require_key(block, key, origin, ConfigValue::Kind::List, "list").list;
}

const ConfigBlock& require_block(const ConfigBlock& block, const std::string& key,
                                 const std::string& origin) {
    return require_key(block, key, origin, ConfigValue::Kind::Block, "block").block;
}

std::string get_string(const ConfigBlock& block, const std::string& key,
                       const std::string& fallback) {
    const ConfigValue* v = find_key(block, key);
    return v && v->kind == ConfigValue::Kind::Scalar ? v->scalar : fallback;
}

double get_number(const ConfigBlock& block, const std::string& key, double fallback) {
    const ConfigValue* v = find_key(block, key);
    if (!v || v->kind != ConfigValue::Kind::Scalar) return fallback;
    char* end = nullptr;
    const double num = std::strtod(v->scalar.c_str(), &end);
    return end != v->scalar.c_str() && *end == '\0' ? num : fallback;
}

bool get_bool(const ConfigBlock& block, const std::string& key, bool fallback) {
    const ConfigValue* v = find_key(block, key);
    if (!v || v->kind != ConfigValue::Kind::Scalar) return fallback;
    if (v->scalar == "true" || v->scalar == "yes" || v->scalar == "on") return true;
    if (v->scalar == "false" || v->scalar == "no" || v->scalar == "off") return false;
    throw SpecError("key '" + key + "' must be a boolean, got '" + v->scalar + "'");
}

} // namespace diffcomp::harness
