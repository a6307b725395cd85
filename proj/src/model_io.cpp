#include "rrwqbd/model_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <variant>

namespace rrwqbd {

ModelParseError::ModelParseError(int line, int column, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + what),
      line_(line),
      column_(column) {}

namespace {

using Value = std::variant<std::string, double, bool>;

struct Entry {
    Value value;
    int line;
    int column;
};

struct Table {
    std::map<std::string, Entry> entries;
    int line = 0;
};

struct Document {
    Table root;
    std::map<std::string, Table> tables;
};

bool is_bare_key_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '-';
}

class LineParser {
public:
    LineParser(std::string_view line, int lineno) : s_(line), lineno_(lineno) {}

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    }
    bool at_end_or_comment() {
        skip_ws();
        return pos_ >= s_.size() || s_[pos_] == '#';
    }
    char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
    int column() const { return static_cast<int>(pos_) + 1; }

    [[noreturn]] void fail(const std::string& what) const {
        throw ModelParseError(lineno_, column(), what);
    }

    void expect(char c) {
        skip_ws();
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    std::string quoted() {
        ++pos_;  // opening quote
        std::string out;
        while (pos_ < s_.size() && s_[pos_] != '"') {
            if (s_[pos_] == '\\') fail("escape sequences are not supported");
            out.push_back(s_[pos_++]);
        }
        if (pos_ >= s_.size()) fail("unterminated string");
        ++pos_;
        return out;
    }

    std::string key() {
        skip_ws();
        if (peek() == '"') return quoted();
        std::size_t start = pos_;
        while (pos_ < s_.size() && is_bare_key_char(s_[pos_])) ++pos_;
        if (start == pos_) fail("expected a key");
        return std::string(s_.substr(start, pos_ - start));
    }

    Value value() {
        skip_ws();
        if (peek() == '"') return quoted();
        std::size_t start = pos_;
        while (pos_ < s_.size() && s_[pos_] != ' ' && s_[pos_] != '\t' && s_[pos_] != '#') ++pos_;
        std::string_view tok = s_.substr(start, pos_ - start);
        if (tok.empty()) {
            pos_ = start;
            fail("expected a value");
        }
        if (tok == "true") return true;
        if (tok == "false") return false;
        double v = 0.0;
        const char* first = tok.data();
        if (!tok.empty() && tok.front() == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) {
            pos_ = start;
            fail("malformed value '" + std::string(tok) + "'");
        }
        return v;
    }

private:
    std::string_view s_;
    int lineno_;
    std::size_t pos_ = 0;
};

Document parse_document(std::string_view text) {
    Document doc;
    Table* current = &doc.root;
    int lineno = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++lineno;
        start = end + 1;

        LineParser p(line, lineno);
        if (p.at_end_or_comment()) continue;
        if (p.peek() == '[') {
            p.expect('[');
            const std::string name = p.key();
            p.expect(']');
            if (!p.at_end_or_comment()) p.fail("unexpected text after table header");
            if (doc.tables.count(name)) p.fail("duplicate table [" + name + "]");
            current = &doc.tables[name];
            current->line = lineno;
            continue;
        }
        const int key_col = p.column();
        const std::string k = p.key();
        p.expect('=');
        const int value_col = p.column() + 1;
        Value v = p.value();
        if (!p.at_end_or_comment()) p.fail("unexpected text after value");
        if (current->entries.count(k)) throw ModelParseError(lineno, key_col, "duplicate key '" + k + "'");
        current->entries.emplace(k, Entry{std::move(v), lineno, value_col});
    }
    return doc;
}

double number(const std::string& key, const Entry& e) {
    if (const double* d = std::get_if<double>(&e.value)) return *d;
    throw ModelParseError(e.line, e.column, "'" + key + "' must be a number");
}

Offset parse_offset(const std::string& key, const Entry& e) {
    int dx = 0, dy = 0;
    const auto comma = key.find(',');
    auto parse_int = [&](std::string_view s, int& out) {
        while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
        while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
        if (!s.empty() && s.front() == '+') s.remove_prefix(1);
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
    };
    if (comma == std::string::npos || !parse_int(std::string_view(key).substr(0, comma), dx) ||
        !parse_int(std::string_view(key).substr(comma + 1), dy))
        throw ModelParseError(e.line, 1, "offset key '" + key + "' must have the form \"dx,dy\"");
    if (dx < -1 || dx > 1 || dy < -1 || dy > 1)
        throw ModelParseError(e.line, 1, "offset '" + key + "' has a component outside {-1,0,1}");
    return {dx, dy};
}

void reject_unknown(const Table& t, const std::set<std::string>& allowed) {
    for (const auto& [k, e] : t.entries)
        if (!allowed.count(k)) throw ModelParseError(e.line, 1, "unknown key '" + k + "'");
}

const Entry& required(const Table& t, const std::string& key, int line) {
    auto it = t.entries.find(key);
    if (it == t.entries.end()) throw ModelParseError(line, 1, "missing key '" + key + "'");
    return it->second;
}

}  // namespace

ModelFile parse_model(std::string_view text) {
    const Document doc = parse_document(text);
    const auto kind_it = doc.root.entries.find("kind");
    if (kind_it == doc.root.entries.end()) throw ModelParseError(1, 1, "missing key 'kind'");
    const std::string* kind = std::get_if<std::string>(&kind_it->second.value);
    if (!kind) throw ModelParseError(kind_it->second.line, kind_it->second.column, "'kind' must be a string");

    ModelFile out;
    out.kind = *kind;
    if (*kind == "jackson") {
        reject_unknown(doc.root, {"kind", "lambda1", "lambda2", "sigma1", "sigma2", "q1", "q2"});
        if (!doc.tables.empty()) {
            const auto& [name, t] = *doc.tables.begin();
            throw ModelParseError(t.line, 1, "unexpected table [" + name + "] in a jackson model");
        }
        const int last = kind_it->second.line;
        auto get = [&](const char* k) { return number(k, required(doc.root, k, last)); };
        try {
            out.jackson.emplace(get("lambda1"), get("lambda2"), get("sigma1"), get("sigma2"),
                                get("q1"), get("q2"));
        } catch (const std::invalid_argument& e) {
            throw ModelParseError(last, 1, e.what());
        }
        out.spec = jackson_spec(*out.jackson);
        return out;
    }
    if (*kind != "general")
        throw ModelParseError(kind_it->second.line, kind_it->second.column,
                              "kind must be \"jackson\" or \"general\"");

    reject_unknown(doc.root, {"kind", "renormalize"});
    bool renormalize = false;
    if (auto it = doc.root.entries.find("renormalize"); it != doc.root.entries.end()) {
        const bool* b = std::get_if<bool>(&it->second.value);
        if (!b) throw ModelParseError(it->second.line, it->second.column, "'renormalize' must be true or false");
        renormalize = *b;
    }
    for (const auto& [name, t] : doc.tables)
        if (name != "origin" && name != "face1" && name != "face2" && name != "interior")
            throw ModelParseError(t.line, 1, "unknown table [" + name + "]");

    std::array<TransitionLaw, 4> laws;
    for (Region r : kAllRegions) {
        const std::string name(to_string(r));
        auto it = doc.tables.find(name);
        if (it == doc.tables.end())
            throw ModelParseError(1, 1, "missing table [" + name + "]");
        TransitionLaw law(r);
        for (const auto& [k, e] : it->second.entries) law.set(parse_offset(k, e), number(k, e));
        laws[index_of(r)] = law;
    }
    out.spec = RandomWalkSpec(laws[0], laws[1], laws[2], laws[3]);
    if (renormalize) out.spec = renormalized(out.spec);
    return out;
}

ModelFile load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

std::string format_general_model(const RandomWalkSpec& spec) {
    std::ostringstream os;
    os.precision(17);
    os << "kind = \"general\"\n";
    for (Region r : kAllRegions) {
        os << "\n[" << to_string(r) << "]\n";
        for (const auto& [m, p] : spec.law(r).support())
            os << '"' << m.dx << ',' << m.dy << "\" = " << p << '\n';
    }
    return os.str();
}

}  // namespace rrwqbd
