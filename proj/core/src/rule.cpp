#include "epmine/rule.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "epmine/rng.hpp"

namespace epmine {

namespace {

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    RuleAst parse() {
        skip_ws();
        if (pos_ >= text_.size()) throw RuleParseError("empty rule", 0);
        RuleAst ast = parse_expr();
        skip_ws();
        if (pos_ < text_.size())
            throw RuleParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
        return ast;
    }

private:
    RuleAst parse_expr() {
        std::vector<RuleAst> terms;
        terms.push_back(parse_term());
        while (peek() == '|') {
            ++pos_;
            terms.push_back(parse_term());
        }
        return terms.size() == 1 ? std::move(terms.front()) : make_or(std::move(terms));
    }

    RuleAst parse_term() {
        std::vector<RuleAst> factors;
        factors.push_back(parse_factor());
        while (peek() == '&') {
            ++pos_;
            factors.push_back(parse_factor());
        }
        return factors.size() == 1 ? std::move(factors.front()) : make_and(std::move(factors));
    }

    RuleAst parse_factor() {
        skip_ws();
        if (pos_ >= text_.size()) throw RuleParseError("missing operand", pos_);
        const char c = text_[pos_];
        if (c == '!') {
            ++pos_;
            return make_not(parse_factor());
        }
        if (c == '(') {
            const size_t open = pos_++;
            RuleAst inner = parse_expr();
            skip_ws();
            if (pos_ >= text_.size() || text_[pos_] != ')')
                throw RuleParseError("unbalanced '('", open);
            ++pos_;
            return inner;
        }
        if (ident_char(c)) {
            const size_t start = pos_;
            while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
            return make_var(text_.substr(start, pos_ - start));
        }
        throw RuleParseError(std::string("unexpected '") + c + "'", pos_);
    }

    // Peeks the next operator; consumes whitespace only.
    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    const std::string& text_;
    size_t pos_ = 0;
};

int precedence(NodeKind k) {
    switch (k) {
        case NodeKind::Or: return 1;
        case NodeKind::And: return 2;
        case NodeKind::Not: return 3;
        case NodeKind::Var: return 4;
    }
    return 4;
}

void render_node(const RuleAst& node, int parent_prec, std::string& out) {
    const int prec = precedence(node.kind);
    const bool parens = prec < parent_prec;
    if (parens) out += '(';
    switch (node.kind) {
        case NodeKind::Var:
            out += node.var;
            break;
        case NodeKind::Not:
            out += '!';
            render_node(node.children.front(), precedence(NodeKind::Not), out);
            break;
        case NodeKind::And:
        case NodeKind::Or: {
            const char* sep = node.kind == NodeKind::And ? " & " : " | ";
            for (size_t i = 0; i < node.children.size(); ++i) {
                if (i > 0) out += sep;
                render_node(node.children[i], prec, out);
            }
            break;
        }
    }
    if (parens) out += ')';
}

void collect_variables(const RuleAst& node, std::vector<std::string>& out) {
    if (node.kind == NodeKind::Var) {
        out.push_back(node.var);
        return;
    }
    for (const auto& child : node.children) collect_variables(child, out);
}

bool eval_assignment(const RuleAst& node, const std::vector<std::string>& variables,
                     uint32_t assignment) {
    switch (node.kind) {
        case NodeKind::Var: {
            const auto it = std::find(variables.begin(), variables.end(), node.var);
            if (it == variables.end())
                throw std::invalid_argument("truth_table: variable '" + node.var +
                                            "' missing from variable list");
            const size_t idx = static_cast<size_t>(it - variables.begin());
            // variable 0 is the most significant bit
            const uint32_t bit = 1u << (variables.size() - 1 - idx);
            return (assignment & bit) != 0;
        }
        case NodeKind::Not:
            return !eval_assignment(node.children.front(), variables, assignment);
        case NodeKind::And:
            for (const auto& c : node.children)
                if (!eval_assignment(c, variables, assignment)) return false;
            return true;
        case NodeKind::Or:
            for (const auto& c : node.children)
                if (eval_assignment(c, variables, assignment)) return true;
            return false;
    }
    return false;
}

struct Confusion {
    uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

    void add(bool predicted, bool truth) {
        if (predicted && truth)
            ++tp;
        else if (predicted && !truth)
            ++fp;
        else if (!predicted && truth)
            ++fn;
        else
            ++tn;
    }

    SemanticMetrics metrics() const {
        SemanticMetrics m;
        const uint64_t total = tp + fp + fn + tn;
        m.accuracy = total ? static_cast<double>(tp + tn) / static_cast<double>(total) : 0.0;
        // Vacuous agreement (no positives on either side) counts as perfect.
        m.precision = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp)
                                : (fn == 0 ? 1.0 : 0.0);
        m.recall = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn)
                             : (fp == 0 ? 1.0 : 0.0);
        m.f1 = (m.precision + m.recall) > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;
        return m;
    }
};

std::vector<std::string> union_variables(const RuleAst& a, const RuleAst& b) {
    std::vector<std::string> vars = extract_variables(a);
    for (auto& v : extract_variables(b)) vars.push_back(std::move(v));
    std::sort(vars.begin(), vars.end(), natural_less);
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    return vars;
}

}  // namespace

bool valid_event_id(const std::string& id) {
    if (id.empty()) return false;
    return std::all_of(id.begin(), id.end(), ident_char);
}

RuleAst make_var(std::string id) {
    if (!valid_event_id(id))
        throw std::invalid_argument("invalid event identifier: '" + id + "'");
    RuleAst node;
    node.kind = NodeKind::Var;
    node.var = std::move(id);
    return node;
}

RuleAst make_not(RuleAst child) {
    RuleAst node;
    node.kind = NodeKind::Not;
    node.children.push_back(std::move(child));
    return node;
}

static RuleAst make_nary(NodeKind kind, std::vector<RuleAst> children) {
    if (children.empty()) throw std::invalid_argument("empty And/Or is unrepresentable");
    if (children.size() == 1) return std::move(children.front());
    RuleAst node;
    node.kind = kind;
    for (auto& child : children) {
        if (child.kind == kind) {
            for (auto& grandchild : child.children) node.children.push_back(std::move(grandchild));
        } else {
            node.children.push_back(std::move(child));
        }
    }
    return node;
}

RuleAst make_and(std::vector<RuleAst> children) { return make_nary(NodeKind::And, std::move(children)); }
RuleAst make_or(std::vector<RuleAst> children) { return make_nary(NodeKind::Or, std::move(children)); }

RuleAst parse_rule(const std::string& text) { return Parser(text).parse(); }

std::string render_rule(const RuleAst& ast) {
    std::string out;
    render_node(ast, 0, out);
    return out;
}

bool eval_rule(const RuleAst& ast, const std::unordered_set<std::string>& present) {
    switch (ast.kind) {
        case NodeKind::Var:
            return present.contains(ast.var);
        case NodeKind::Not:
            return !eval_rule(ast.children.front(), present);
        case NodeKind::And:
            for (const auto& c : ast.children)
                if (!eval_rule(c, present)) return false;
            return true;
        case NodeKind::Or:
            for (const auto& c : ast.children)
                if (eval_rule(c, present)) return true;
            return false;
    }
    return false;
}

bool natural_less(const std::string& a, const std::string& b) {
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const bool da = std::isdigit(static_cast<unsigned char>(a[i]));
        const bool db = std::isdigit(static_cast<unsigned char>(b[j]));
        if (da && db) {
            size_t ia = i, jb = j;
            while (ia < a.size() && std::isdigit(static_cast<unsigned char>(a[ia]))) ++ia;
            while (jb < b.size() && std::isdigit(static_cast<unsigned char>(b[jb]))) ++jb;
            // compare numeric value: strip leading zeros, then length, then digits
            size_t sa = i, sb = j;
            while (sa + 1 < ia && a[sa] == '0') ++sa;
            while (sb + 1 < jb && b[sb] == '0') ++sb;
            const size_t la = ia - sa, lb = jb - sb;
            if (la != lb) return la < lb;
            const int cmp = a.compare(sa, la, b, sb, lb);
            if (cmp != 0) return cmp < 0;
            // equal value: fewer leading zeros first
            if (ia - i != jb - j) return ia - i < jb - j;
            i = ia;
            j = jb;
        } else {
            if (a[i] != b[j]) return a[i] < b[j];
            ++i;
            ++j;
        }
    }
    return a.size() - i < b.size() - j;
}

std::vector<std::string> extract_variables(const RuleAst& ast) {
    std::vector<std::string> vars;
    collect_variables(ast, vars);
    std::sort(vars.begin(), vars.end(), natural_less);
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    return vars;
}

TruthTable truth_table(const RuleAst& ast, const std::vector<std::string>& variables) {
    if (variables.size() > kMaxTruthTableVars)
        throw VariableCapError("truth table over " + std::to_string(variables.size()) +
                               " variables exceeds the cap of " +
                               std::to_string(kMaxTruthTableVars));
    for (const auto& v : extract_variables(ast)) {
        if (std::find(variables.begin(), variables.end(), v) == variables.end())
            throw std::invalid_argument("truth_table: variable '" + v +
                                        "' missing from variable list");
    }
    TruthTable table;
    table.variables = variables;
    const size_t row_count = size_t{1} << variables.size();
    table.rows.resize(row_count);
    for (size_t r = 0; r < row_count; ++r)
        table.rows[r] = eval_assignment(ast, variables, static_cast<uint32_t>(r)) ? 1 : 0;
    return table;
}

std::string truth_table_csv(const TruthTable& table) {
    std::ostringstream out;
    for (const auto& v : table.variables) out << v << ',';
    out << "out\n";
    const size_t n = table.variables.size();
    for (size_t r = 0; r < table.rows.size(); ++r) {
        for (size_t i = 0; i < n; ++i) out << ((r >> (n - 1 - i)) & 1) << ',';
        out << int(table.rows[r]) << '\n';
    }
    return out.str();
}

SemanticMetrics semantic_compare(const RuleAst& predicted, const RuleAst& ground_truth) {
    const std::vector<std::string> vars = union_variables(predicted, ground_truth);
    if (vars.size() > kMaxTruthTableVars)
        throw VariableCapError("semantic_compare union of " + std::to_string(vars.size()) +
                               " variables exceeds the cap of " +
                               std::to_string(kMaxTruthTableVars));
    Confusion confusion;
    const size_t row_count = size_t{1} << vars.size();
    for (size_t r = 0; r < row_count; ++r) {
        const auto assignment = static_cast<uint32_t>(r);
        confusion.add(eval_assignment(predicted, vars, assignment),
                      eval_assignment(ground_truth, vars, assignment));
    }
    return confusion.metrics();
}

bool CompiledRule::eval(std::span<const uint8_t> present) const {
    switch (kind) {
        case NodeKind::Var:
            return token >= 0 && static_cast<size_t>(token) < present.size() &&
                   present[static_cast<size_t>(token)];
        case NodeKind::Not:
            return !children.front().eval(present);
        case NodeKind::And:
            for (const auto& c : children)
                if (!c.eval(present)) return false;
            return true;
        case NodeKind::Or:
            for (const auto& c : children)
                if (c.eval(present)) return true;
            return false;
    }
    return false;
}

CompiledRule compile_rule(const RuleAst& ast,
                          const std::function<int32_t(const std::string&)>& token_of) {
    CompiledRule out;
    out.kind = ast.kind;
    if (ast.kind == NodeKind::Var) {
        out.token = token_of(ast.var);
    } else {
        out.children.reserve(ast.children.size());
        for (const auto& c : ast.children) out.children.push_back(compile_rule(c, token_of));
    }
    return out;
}

SemanticMetrics semantic_compare_sampled(const RuleAst& predicted, const RuleAst& ground_truth,
                                         size_t samples, uint64_t seed) {
    if (samples == 0) throw std::invalid_argument("semantic_compare_sampled: samples must be >= 1");
    const std::vector<std::string> vars = union_variables(predicted, ground_truth);
    Rng rng(derive_seed(seed, "semantic-sample"));
    Confusion confusion;
    std::unordered_set<std::string> present;
    for (size_t s = 0; s < samples; ++s) {
        present.clear();
        for (const auto& v : vars)
            if (rng.next_u64() & 1) present.insert(v);
        confusion.add(eval_rule(predicted, present), eval_rule(ground_truth, present));
    }
    SemanticMetrics m = confusion.metrics();
    m.sampled = true;
    return m;
}

}  // namespace epmine
