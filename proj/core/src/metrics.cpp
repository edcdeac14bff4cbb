#include "evofda/metrics.hpp"

#include "evofda/textio.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace evofda {

const MethodFacts* ClassFacts::find_method(std::string_view name) const {
    for (const auto& m : methods)
        if (m.name == name)
            return &m;
    return nullptr;
}

const ClassFacts* CodeModel::find_class(std::string_view name) const {
    for (const auto& c : classes)
        if (c.name == name)
            return &c;
    return nullptr;
}

namespace {

bool valid_identifier(std::string_view s) {
    if (s.empty())
        return false;
    auto head = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$'; };
    auto body = [&](char c) { return head(c) || std::isdigit(static_cast<unsigned char>(c)); };
    if (!head(s[0]))
        return false;
    std::size_t i = 1;
    while (i < s.size() && body(s[i]))
        ++i;
    if (i == s.size())
        return true;
    // optional overload-arity suffix, e.g. run#2
    if (s[i] != '#' || i + 1 == s.size())
        return false;
    for (++i; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i])))
            return false;
    return true;
}

// Class names may be dotted (nested types); the member separator is the last dot.
std::pair<std::string_view, std::string_view> split_member(std::string_view qualified,
                                                           std::size_t line) {
    std::size_t dot = qualified.rfind('.');
    if (dot == std::string_view::npos || dot == 0 || dot + 1 == qualified.size())
        throw ParseError(line, "expected <Class>.<member>, got '" + std::string(qualified) + "'");
    return {qualified.substr(0, dot), qualified.substr(dot + 1)};
}

std::vector<std::string_view> tokenize(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t'))
            ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t')
            ++i;
        if (i > start)
            tokens.push_back(line.substr(start, i - start));
    }
    return tokens;
}

} // namespace

CodeModel parse_code_model(std::string_view text) {
    CodeModel model;
    std::map<std::string, std::size_t, std::less<>> class_index;
    bool loc_seen = false;

    auto require_class = [&](std::string_view name, std::size_t line) -> ClassFacts& {
        auto it = class_index.find(name);
        if (it == class_index.end())
            throw ParseError(line, "unknown class '" + std::string(name) + "'");
        return model.classes[it->second];
    };
    auto require_method = [](ClassFacts& c, std::string_view qualified, std::string_view member,
                             std::size_t line) -> MethodFacts& {
        for (auto& m : c.methods)
            if (m.name == member)
                return m;
        throw ParseError(line, "unknown method '" + std::string(qualified) + "'");
    };

    const auto lines = split_lines(text);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const std::size_t line_no = ln + 1;
        std::string_view line = lines[ln];
        if (std::size_t hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        const auto tokens = tokenize(line);
        if (tokens.empty())
            continue;
        const std::string_view stmt = tokens[0];

        if (stmt == "loc") {
            if (tokens.size() != 2)
                throw ParseError(line_no, "loc takes one integer argument");
            if (loc_seen)
                throw ParseError(line_no, "duplicate loc declaration");
            model.loc = parse_long(tokens[1], line_no);
            if (model.loc < 0)
                throw ParseError(line_no, "loc must be non-negative");
            loc_seen = true;
        } else if (stmt == "class") {
            if (tokens.size() != 2)
                throw ParseError(line_no, "class takes one name");
            if (!valid_identifier(tokens[1]) && tokens[1].find('.') == std::string_view::npos)
                throw ParseError(line_no, "bad class name '" + std::string(tokens[1]) + "'");
            if (class_index.contains(tokens[1]))
                throw ParseError(line_no, "duplicate class declaration '" + std::string(tokens[1]) + "'");
            class_index.emplace(std::string(tokens[1]), model.classes.size());
            model.classes.push_back(ClassFacts{std::string(tokens[1]), {}, {}});
        } else if (stmt == "field") {
            if (tokens.size() != 2)
                throw ParseError(line_no, "field takes <Class>.<field>");
            auto [cls, member] = split_member(tokens[1], line_no);
            if (!valid_identifier(member))
                throw ParseError(line_no, "bad field name '" + std::string(member) + "'");
            ClassFacts& c = require_class(cls, line_no);
            if (!c.fields.emplace(member).second)
                throw ParseError(line_no, "duplicate field declaration '" + std::string(tokens[1]) + "'");
        } else if (stmt == "method") {
            if (tokens.size() != 2)
                throw ParseError(line_no, "method takes <Class>.<method>");
            auto [cls, member] = split_member(tokens[1], line_no);
            if (!valid_identifier(member))
                throw ParseError(line_no, "bad method name '" + std::string(member) + "'");
            ClassFacts& c = require_class(cls, line_no);
            if (c.find_method(member))
                throw ParseError(line_no, "duplicate method declaration '" + std::string(tokens[1]) + "'");
            c.methods.push_back(MethodFacts{std::string(member), {}, {}});
        } else if (stmt == "access") {
            if (tokens.size() != 3)
                throw ParseError(line_no, "access takes <Class>.<method> <field>");
            auto [cls, member] = split_member(tokens[1], line_no);
            ClassFacts& c = require_class(cls, line_no);
            MethodFacts& m = require_method(c, tokens[1], member, line_no);
            if (!c.fields.contains(std::string(tokens[2])))
                throw ParseError(line_no, "access to undeclared field '" + std::string(tokens[2]) +
                                              "' in class '" + std::string(cls) + "'");
            m.accessed_fields.emplace(tokens[2]);
        } else if (stmt == "ref") {
            if (tokens.size() != 3)
                throw ParseError(line_no, "ref takes <Class>.<method> <OtherClass>");
            auto [cls, member] = split_member(tokens[1], line_no);
            ClassFacts& c = require_class(cls, line_no);
            MethodFacts& m = require_method(c, tokens[1], member, line_no);
            m.referenced_classes.emplace(tokens[2]);
            if (!class_index.contains(tokens[2]))
                model.external_classes.emplace(tokens[2]);
        } else {
            throw ParseError(line_no, "unknown statement '" + std::string(stmt) + "'");
        }
    }

    // A class declared after a ref to it is not external after all.
    for (auto it = model.external_classes.begin(); it != model.external_classes.end();) {
        if (class_index.contains(*it))
            it = model.external_classes.erase(it);
        else
            ++it;
    }
    return model;
}

double class_coupling(const CodeModel& model, std::string_view class_name, CouplingMode mode) {
    const ClassFacts* c = model.find_class(class_name);
    if (!c)
        throw std::invalid_argument("unknown class '" + std::string(class_name) + "'");
    if (mode == CouplingMode::distinct) {
        std::set<std::string> referenced;
        for (const auto& m : c->methods)
            referenced.insert(m.referenced_classes.begin(), m.referenced_classes.end());
        referenced.erase(std::string(class_name));
        return double(referenced.size());
    }
    std::size_t total = 0;
    for (const auto& m : c->methods) {
        total += m.referenced_classes.size();
        if (m.referenced_classes.contains(std::string(class_name)))
            --total;
    }
    return double(total);
}

double class_lack_of_cohesion(const CodeModel& model, std::string_view class_name) {
    const ClassFacts* c = model.find_class(class_name);
    if (!c)
        throw std::invalid_argument("unknown class '" + std::string(class_name) + "'");
    const std::size_t m = c->methods.size();
    const std::size_t a = c->fields.size();
    if (m <= 1 || a == 0)
        return 0.0;
    double accruals = 0; // total (field, accessing-method) pairs
    for (const auto& method : c->methods)
        accruals += double(method.accessed_fields.size());
    const double a_bar = accruals / double(a);
    const double lcom = (a_bar - double(m)) / (1.0 - double(m));
    return 100.0 * std::clamp(lcom, 0.0, 1.0);
}

ComplexitySnapshot project_complexity(const CodeModel& model, CouplingMode mode) {
    if (model.classes.empty())
        throw std::invalid_argument("project_complexity requires at least one class");
    double cpl_sum = 0, lcoh_sum = 0;
    for (const auto& c : model.classes) {
        cpl_sum += class_coupling(model, c.name, mode);
        lcoh_sum += class_lack_of_cohesion(model, c.name);
    }
    ComplexitySnapshot snap;
    snap.cpl = cpl_sum / double(model.classes.size());
    snap.lcoh = lcoh_sum / double(model.classes.size());
    snap.cplxlcoh = snap.cpl * snap.lcoh;
    snap.loc = model.loc;
    return snap;
}

LocCount count_loc(std::string_view source_text) {
    LocCount result;
    bool in_block = false;
    for (std::string_view line : split_lines(source_text)) {
        bool has_code = false;
        for (std::size_t i = 0; i < line.size();) {
            if (in_block) {
                std::size_t close = line.find("*/", i);
                if (close == std::string_view::npos) {
                    i = line.size();
                } else {
                    in_block = false;
                    i = close + 2;
                }
            } else if (line.compare(i, 2, "//") == 0) {
                break;
            } else if (line.compare(i, 2, "/*") == 0) {
                in_block = true;
                i += 2;
            } else {
                if (line[i] != ' ' && line[i] != '\t')
                    has_code = true;
                ++i;
            }
        }
        if (has_code)
            ++result.lines;
    }
    result.unterminated_block_comment = in_block;
    return result;
}

} // namespace evofda
