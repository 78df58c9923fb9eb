#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace epmine {

// Boolean error-pattern rules over event identifiers.
//
// Grammar (tightest to loosest: ! over & over |, both binary ops
// left-associative, associative chains flattened):
//   expr   := term ('|' term)*
//   term   := factor ('&' factor)*
//   factor := '!' factor | '(' expr ')' | IDENT
//   IDENT  := [A-Za-z0-9_]+
//
// A Var is true iff its event id occurs anywhere in the presence set.

enum class NodeKind : uint8_t { Var, Not, And, Or };

struct RuleAst {
    NodeKind kind = NodeKind::Var;
    std::string var;                 // Var only
    std::vector<RuleAst> children;   // Not: exactly 1; And/Or: >= 2

    bool operator==(const RuleAst&) const = default;
};

class RuleParseError : public std::runtime_error {
public:
    RuleParseError(const std::string& what, size_t position)
        : std::runtime_error(what + " at position " + std::to_string(position)),
          position_(position) {}
    size_t position() const { return position_; }

private:
    size_t position_;
};

// Thrown by truth_table/semantic_compare when the variable set exceeds
// kMaxTruthTableVars; callers fall back to sampled comparison.
class VariableCapError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// 2^20 rows is the largest table we enumerate exhaustively.
inline constexpr int kMaxTruthTableVars = 20;

struct TruthTable {
    std::vector<std::string> variables;  // variable 0 = most significant bit
    std::vector<uint8_t> rows;           // 2^n outputs, lexicographic assignment order
};

struct SemanticMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool sampled = false;  // true when estimated over random assignments
};

bool valid_event_id(const std::string& id);

// Node factories. And/Or splice nested children of the same kind, so every
// constructed tree is already in flattened form; a single-element And/Or
// collapses to its child. Empty And/Or throws.
RuleAst make_var(std::string id);
RuleAst make_not(RuleAst child);
RuleAst make_and(std::vector<RuleAst> children);
RuleAst make_or(std::vector<RuleAst> children);

RuleAst parse_rule(const std::string& text);
std::string render_rule(const RuleAst& ast);

bool eval_rule(const RuleAst& ast, const std::unordered_set<std::string>& present);

// Numeric-aware ordering ("x2" < "x10"); used for all variable lists.
bool natural_less(const std::string& a, const std::string& b);

// Sorted, deduplicated variables, including those under negation.
std::vector<std::string> extract_variables(const RuleAst& ast);

TruthTable truth_table(const RuleAst& ast, const std::vector<std::string>& variables);
std::string truth_table_csv(const TruthTable& table);

// Compare truth tables over the union variable set; ground-truth column is
// the label, predicted column the prediction, positive class = 1.
SemanticMetrics semantic_compare(const RuleAst& predicted, const RuleAst& ground_truth);

// Sampled fallback for rule pairs above the variable cap.
SemanticMetrics semantic_compare_sampled(const RuleAst& predicted, const RuleAst& ground_truth,
                                         size_t samples, uint64_t seed);

// Rule with variables resolved to token ids for bitmap evaluation in hot
// loops. Unknown variables map to -1 and evaluate false.
struct CompiledRule {
    NodeKind kind = NodeKind::Var;
    int32_t token = -1;
    std::vector<CompiledRule> children;

    bool eval(std::span<const uint8_t> present) const;
};

CompiledRule compile_rule(const RuleAst& ast,
                          const std::function<int32_t(const std::string&)>& token_of);

}  // namespace epmine
