#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace evofda {

/// Method-level facts: which of the owning class's fields the method touches
/// and which classes it references (parameter types, locals, call targets).
struct MethodFacts {
    std::string name;
    std::set<std::string> accessed_fields;
    std::set<std::string> referenced_classes;
};

struct ClassFacts {
    std::string name;
    std::set<std::string> fields;
    std::vector<MethodFacts> methods; // declaration order, names unique

    const MethodFacts* find_method(std::string_view name) const;
};

/// One code snapshot described as declarative facts. Referenced class names
/// that do not resolve inside the model are kept in `external_classes`.
struct CodeModel {
    std::vector<ClassFacts> classes; // declaration order, names unique
    long loc = 0;
    std::set<std::string> external_classes;

    const ClassFacts* find_class(std::string_view name) const;
};

enum class CouplingMode {
    distinct,  // count distinct referenced classes per class
    instances, // sum per-method distinct references over methods
};

struct ComplexitySnapshot {
    double cpl = 0;       // mean coupling per class
    double lcoh = 0;      // mean lack of cohesion per class, percent in [0,100]
    double cplxlcoh = 0;  // cpl * lcoh
    long loc = 0;
};

/// Parses the fact-file format:
///
///   loc <integer>
///   class <Name>
///   field <Class>.<field>
///   method <Class>.<method>
///   access <Class>.<method> <field>
///   ref <Class>.<method> <OtherClass>
///
/// One statement per line, `#` starts a comment, blank lines ignored.
/// Declarations must precede uses; `ref` targets may be undeclared and are
/// then recorded as external classes. Throws ParseError with the line number
/// on syntax errors, duplicate declarations, or access to undeclared fields.
CodeModel parse_code_model(std::string_view text);

/// Coupling of one class: distinct other classes referenced by its methods
/// (self-references excluded). In `instances` mode, per-method distinct
/// references are summed instead of unioned. Throws std::invalid_argument for
/// an unknown class name.
double class_coupling(const CodeModel& model, std::string_view class_name,
                      CouplingMode mode = CouplingMode::distinct);

/// Lack of cohesion on a 0..100 percent scale:
///   100 * (a_bar - m) / (1 - m)
/// with m methods, a fields and a_bar the mean number of methods accessing
/// each field. Degenerate classes (m <= 1 or a == 0) score 0; classes with
/// fields no method touches can push the raw ratio past 1, so the result is
/// clamped to [0, 100].
double class_lack_of_cohesion(const CodeModel& model, std::string_view class_name);

/// Per-class means of coupling and lack of cohesion plus their product.
/// Throws std::invalid_argument for a model with no classes.
ComplexitySnapshot project_complexity(const CodeModel& model,
                                      CouplingMode mode = CouplingMode::distinct);

struct LocCount {
    std::size_t lines = 0;
    bool unterminated_block_comment = false; // remaining lines counted as comment
};

/// Counts source lines that are neither blank nor comment-only. Handles //
/// line comments and /* */ block comments; string literals are not scanned,
/// so a comment opener inside a string is treated as a comment.
LocCount count_loc(std::string_view source_text);

} // namespace evofda
