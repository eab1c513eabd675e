#include "austere/language.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>

#include "austere/errors.hpp"

namespace austere {

namespace {

// Generic bracketed tree produced by the reader before classification.
struct SExpr {
    enum class Kind { Atom, List, Bracket, Quote, Placeholder };
    Kind kind = Kind::Atom;
    std::string text;
    std::optional<std::size_t> index;
    std::vector<SExpr> items;
    SourceLocation loc;
};

class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    std::vector<SExpr> read_all() {
        std::vector<SExpr> out;
        skip_space();
        while (pos_ < text_.size()) {
            out.push_back(read());
            skip_space();
        }
        return out;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }

    SourceLocation here() const { return {line_, col_}; }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_space() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == ';' || c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    static bool delimiter(char c) {
        return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '[' || c == ']' ||
               c == '{' || c == '}' || c == '\'' || c == ';' || c == '#' || c == '\0';
    }

    SExpr read() {
        skip_space();
        SExpr e;
        e.loc = here();
        const char c = peek();
        if (c == '\0') fail("unexpected end of input");
        if (c == '(' || c == '[') {
            const char close = c == '(' ? ')' : ']';
            e.kind = c == '(' ? SExpr::Kind::List : SExpr::Kind::Bracket;
            advance();
            while (true) {
                skip_space();
                if (pos_ >= text_.size()) throw ParseError(std::string("unbalanced '") + c + "'", e.loc.line, e.loc.column);
                if (peek() == close) {
                    advance();
                    break;
                }
                if (peek() == ')' || peek() == ']') fail(std::string("mismatched '") + peek() + "'");
                e.items.push_back(read());
            }
            return e;
        }
        if (c == ')' || c == ']') fail(std::string("unexpected '") + c + "'");
        if (c == '}') fail("unexpected '}'");
        if (c == '\'') {
            advance();
            e.kind = SExpr::Kind::Quote;
            SExpr inner = read();
            if (inner.kind != SExpr::Kind::Atom) fail("only symbols may be quoted");
            e.text = inner.text;
            return e;
        }
        if (c == '{') {
            advance();
            e.kind = SExpr::Kind::Placeholder;
            std::string body;
            while (pos_ < text_.size() && peek() != '}') {
                body += peek();
                advance();
            }
            if (pos_ >= text_.size()) throw ParseError("unterminated placeholder", e.loc.line, e.loc.column);
            advance();
            parse_placeholder(body, e);
            return e;
        }
        while (!delimiter(peek())) {
            e.text += peek();
            advance();
        }
        return e;
    }

    void parse_placeholder(const std::string& body, SExpr& e) const {
        const auto open = body.find('[');
        std::string name = body.substr(0, open);
        auto trim = [](std::string s) {
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
            std::size_t i = 0;
            while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
            return s.substr(i);
        };
        name = trim(name);
        if (name.empty()) throw ParseError("empty placeholder", e.loc.line, e.loc.column);
        for (char ch : name)
            if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_'))
                throw ParseError("invalid placeholder name '" + name + "'", e.loc.line, e.loc.column);
        e.text = name;
        if (open != std::string::npos) {
            const auto close = body.find(']', open);
            if (close == std::string::npos || trim(body.substr(close + 1)) != "")
                throw ParseError("malformed placeholder index", e.loc.line, e.loc.column);
            const std::string idx = trim(body.substr(open + 1, close - open - 1));
            std::size_t value = 0;
            const auto res = std::from_chars(idx.data(), idx.data() + idx.size(), value);
            if (idx.empty() || res.ec != std::errc() || res.ptr != idx.data() + idx.size())
                throw ParseError("placeholder index must be an integer literal", e.loc.line, e.loc.column);
            e.index = value;
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    const char c = s[0];
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.')) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) return std::nullopt;
    if (s == "-" || s == "+" || s == ".") return std::nullopt;
    return v;
}

std::shared_ptr<Expression> located(SourceLocation loc) {
    auto e = std::make_shared<Expression>();
    e->location = loc;
    return e;
}

[[noreturn]] void fail_at(const SExpr& s, const std::string& msg) {
    throw ParseError(msg, s.loc.line, s.loc.column);
}

ExprPtr to_expression(const SExpr& s) {
    auto e = located(s.loc);
    switch (s.kind) {
        case SExpr::Kind::Atom: {
            if (auto n = parse_number(s.text)) {
                e->node = ConstantExpr{Value::real(*n)};
            } else if (s.text == "true") {
                e->node = ConstantExpr{Value::boolean(true)};
            } else if (s.text == "false") {
                e->node = ConstantExpr{Value::boolean(false)};
            } else {
                e->node = SymbolExpr{s.text};
            }
            return e;
        }
        case SExpr::Kind::Quote: e->node = ConstantExpr{Value::symbol(s.text)}; return e;
        case SExpr::Kind::Placeholder: e->node = PlaceholderExpr{s.text, s.index}; return e;
        case SExpr::Kind::Bracket: fail_at(s, "directive brackets are not allowed inside an expression");
        case SExpr::Kind::List: break;
    }
    if (s.items.empty()) fail_at(s, "empty combination");
    const SExpr& head = s.items.front();
    if (head.kind == SExpr::Kind::Atom && head.text == "if") {
        if (s.items.size() != 4) fail_at(s, "if takes a predicate and two branches");
        e->node = IfExpr{to_expression(s.items[1]), to_expression(s.items[2]), to_expression(s.items[3])};
        return e;
    }
    if (head.kind == SExpr::Kind::Atom && head.text == "lambda") {
        if (s.items.size() != 3 || s.items[1].kind != SExpr::Kind::List)
            fail_at(s, "lambda takes a parameter list and a body");
        LambdaExpr lam;
        for (const SExpr& p : s.items[1].items) {
            if (p.kind != SExpr::Kind::Atom || parse_number(p.text) || is_reserved_symbol(p.text))
                fail_at(p, "lambda parameters must be symbols");
            lam.params.push_back(p.text);
        }
        lam.body = to_expression(s.items[2]);
        e->node = std::move(lam);
        return e;
    }
    CombinationExpr comb;
    comb.op = to_expression(head);
    for (std::size_t i = 1; i < s.items.size(); ++i) comb.operands.push_back(to_expression(s.items[i]));
    e->node = std::move(comb);
    return e;
}

Numeric to_numeric(const SExpr& s) {
    if (s.kind == SExpr::Kind::Placeholder) return PlaceholderExpr{s.text, s.index};
    if (s.kind == SExpr::Kind::Atom)
        if (auto n = parse_number(s.text)) return *n;
    fail_at(s, "expected a number or placeholder");
}

std::string scope_name(const SExpr& s) {
    if ((s.kind == SExpr::Kind::Atom && !parse_number(s.text)) || s.kind == SExpr::Kind::Quote) return s.text;
    fail_at(s, "expected a scope name");
}

InferTarget to_target(const SExpr& s) {
    if (s.kind == SExpr::Kind::Atom && s.text == "all") return {TargetKind::All, 0.0};
    if (s.kind == SExpr::Kind::Atom && s.text == "one") return {TargetKind::One, 0.0};
    return {TargetKind::Label, to_numeric(s)};
}

// Parses "[proposal] steps" from items[first..].
void proposal_and_steps(const SExpr& s, std::size_t first, ProposalExpr& proposal, Numeric& steps) {
    const std::size_t rest = s.items.size() - first;
    if (rest == 1) {
        steps = to_numeric(s.items[first]);
        return;
    }
    const SExpr& p = s.items[first];
    if (p.kind != SExpr::Kind::Quote) fail_at(p, "expected a quoted proposal name");
    if (p.text == "drift" && rest == 3) {
        proposal.kind = ProposalExpr::Kind::Drift;
        proposal.sigma = to_numeric(s.items[first + 1]);
        steps = to_numeric(s.items[first + 2]);
        return;
    }
    if (p.text == "prior" && rest == 2) {
        proposal.kind = ProposalExpr::Kind::Prior;
        steps = to_numeric(s.items[first + 1]);
        return;
    }
    fail_at(p, "unknown proposal '" + p.text + "'");
}

std::string sexpr_text(const SExpr& s) {
    switch (s.kind) {
        case SExpr::Kind::Atom: return s.text;
        case SExpr::Kind::Quote: return "'" + s.text;
        case SExpr::Kind::Placeholder:
            return "{" + s.text + (s.index ? "[" + std::to_string(*s.index) + "]" : "") + "}";
        case SExpr::Kind::List:
        case SExpr::Kind::Bracket: {
            std::string out = s.kind == SExpr::Kind::List ? "(" : "[";
            for (std::size_t i = 0; i < s.items.size(); ++i) out += (i ? " " : "") + sexpr_text(s.items[i]);
            return out + (s.kind == SExpr::Kind::List ? ")" : "]");
        }
    }
    return "";
}

InferExpression to_infer(const SExpr& s) {
    if (s.kind != SExpr::Kind::List || s.items.empty() || s.items[0].kind != SExpr::Kind::Atom)
        fail_at(s, "expected an inference expression");
    static const std::set<std::string, std::less<>> unsupported{"pgibbs", "func_pgibbs", "gibbs", "slice",
                                                                "rejection", "hmc", "meanfield"};
    const std::string& head = s.items[0].text;
    const std::size_t n = s.items.size();
    InferExpression out;
    if (head == "mh") {
        if (n < 4 || n > 6) fail_at(s, "mh takes scope, target, optional proposal and steps");
        MHExpr mh;
        mh.scope = scope_name(s.items[1]);
        mh.target = to_target(s.items[2]);
        proposal_and_steps(s, 3, mh.proposal, mh.steps);
        out.node = std::move(mh);
    } else if (head == "subsampled_mh") {
        if (n < 6 || n > 8) fail_at(s, "subsampled_mh takes scope, target, batch, epsilon, optional proposal and steps");
        SubsampledMHExpr sm;
        sm.scope = scope_name(s.items[1]);
        sm.target = to_target(s.items[2]);
        sm.batch = to_numeric(s.items[3]);
        sm.epsilon = to_numeric(s.items[4]);
        proposal_and_steps(s, 5, sm.proposal, sm.steps);
        out.node = std::move(sm);
    } else if (head == "cycle") {
        if (n != 3 || s.items[1].kind != SExpr::Kind::List) fail_at(s, "cycle takes a kernel list and a repeat count");
        CycleExpr cyc;
        for (const SExpr& k : s.items[1].items) cyc.kernels.push_back(to_infer(k));
        cyc.repeats = to_numeric(s.items[2]);
        out.node = std::move(cyc);
    } else if (unsupported.contains(head)) {
        out.node = UnsupportedExpr{head, sexpr_text(s)};
    } else {
        fail_at(s.items[0], "unknown inference kernel '" + head + "'");
    }
    return out;
}

Directive to_directive(const SExpr& s) {
    if (s.kind != SExpr::Kind::Bracket) fail_at(s, "expected a bracketed directive");
    if (s.items.empty() || s.items[0].kind != SExpr::Kind::Atom) fail_at(s, "expected a directive keyword");
    const std::string& kw = s.items[0].text;
    Directive d;
    d.location = s.loc;
    if (kw == "assume") {
        if (s.items.size() != 3 || s.items[1].kind != SExpr::Kind::Atom || parse_number(s.items[1].text) ||
            is_reserved_symbol(s.items[1].text))
            fail_at(s, "assume takes a symbol and an expression");
        d.node = AssumeDirective{s.items[1].text, to_expression(s.items[2])};
    } else if (kw == "observe") {
        if (s.items.size() != 3) fail_at(s, "observe takes an expression and a value");
        const SExpr& v = s.items[2];
        const bool literal = v.kind == SExpr::Kind::Placeholder ||
                             (v.kind == SExpr::Kind::Atom &&
                              (parse_number(v.text) || v.text == "true" || v.text == "false"));
        if (!literal) fail_at(v, "observed value must be a literal or placeholder");
        d.node = ObserveDirective{to_expression(s.items[1]), to_expression(v)};
    } else if (kw == "predict") {
        if (s.items.size() != 2) fail_at(s, "predict takes one expression");
        ExprPtr e = to_expression(s.items[1]);
        d.node = PredictDirective{e, to_string(*e)};
    } else if (kw == "infer") {
        if (s.items.size() != 2) fail_at(s, "infer takes one inference expression");
        d.node = InferDirective{to_infer(s.items[1])};
    } else {
        fail_at(s.items[0], "unknown directive '" + kw + "'");
    }
    return d;
}

std::string format_number(double x) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

std::string numeric_text(const Numeric& n) {
    if (const double* d = std::get_if<double>(&n)) return format_number(*d);
    const auto& p = std::get<PlaceholderExpr>(n);
    return "{" + p.name + (p.index ? "[" + std::to_string(*p.index) + "]" : "") + "}";
}

std::string target_text(const InferTarget& t) {
    switch (t.kind) {
        case TargetKind::All: return "all";
        case TargetKind::One: return "one";
        case TargetKind::Label: return numeric_text(t.label);
    }
    return "";
}

std::string proposal_text(const ProposalExpr& p) {
    switch (p.kind) {
        case ProposalExpr::Kind::Default: return "";
        case ProposalExpr::Kind::Prior: return " 'prior";
        case ProposalExpr::Kind::Drift: return " 'drift " + numeric_text(p.sigma);
    }
    return "";
}

Value lookup_binding(const PlaceholderExpr& p, const Bindings& bindings) {
    const auto it = bindings.find(p.name);
    if (it == bindings.end()) throw UnboundParameter(p.name);
    if (!p.index) {
        if (const Value* v = std::get_if<Value>(&it->second)) return *v;
        throw ConfigError("binding '" + p.name + "' is a sequence and must be indexed");
    }
    const std::size_t i = *p.index;
    const std::string where = p.name + "[" + std::to_string(i) + "]";
    if (i == 0) throw UnboundParameter(where);
    if (const auto* seq = std::get_if<std::vector<Value>>(&it->second)) {
        if (i > seq->size()) throw UnboundParameter(where);
        return (*seq)[i - 1];
    }
    const Value& v = std::get<Value>(it->second);
    if (v.is_vector()) {
        if (i > v.as_vector().size()) throw UnboundParameter(where);
        return Value::real(v.as_vector()[i - 1]);
    }
    if (v.is_matrix()) {
        if (i > v.as_matrix().rows) throw UnboundParameter(where);
        return Value::vector(v.as_matrix().row(i - 1));
    }
    throw ConfigError("binding '" + p.name + "' is not indexable");
}

Numeric desugar_numeric(const Numeric& n, const Bindings& bindings) {
    if (const auto* p = std::get_if<PlaceholderExpr>(&n)) return lookup_binding(*p, bindings).as_real();
    return n;
}

void desugar_target(InferTarget& t, const Bindings& b) { t.label = desugar_numeric(t.label, b); }

void desugar_proposal(ProposalExpr& p, const Bindings& b) { p.sigma = desugar_numeric(p.sigma, b); }

InferExpression desugar_infer(const InferExpression& in, const Bindings& b) {
    InferExpression out = in;
    if (auto* mh = std::get_if<MHExpr>(&out.node)) {
        desugar_target(mh->target, b);
        desugar_proposal(mh->proposal, b);
        mh->steps = desugar_numeric(mh->steps, b);
    } else if (auto* sm = std::get_if<SubsampledMHExpr>(&out.node)) {
        desugar_target(sm->target, b);
        desugar_proposal(sm->proposal, b);
        sm->batch = desugar_numeric(sm->batch, b);
        sm->epsilon = desugar_numeric(sm->epsilon, b);
        sm->steps = desugar_numeric(sm->steps, b);
    } else if (auto* cyc = std::get_if<CycleExpr>(&out.node)) {
        for (auto& k : cyc->kernels) k = desugar_infer(k, b);
        cyc->repeats = desugar_numeric(cyc->repeats, b);
    }
    return out;
}

}  // namespace

ExprPtr make_constant(Value v) {
    auto e = std::make_shared<Expression>();
    e->node = ConstantExpr{std::move(v)};
    return e;
}

ExprPtr make_symbol(std::string name) {
    auto e = std::make_shared<Expression>();
    e->node = SymbolExpr{std::move(name)};
    return e;
}

ExprPtr make_combination(ExprPtr op, std::vector<ExprPtr> operands) {
    auto e = std::make_shared<Expression>();
    e->node = CombinationExpr{std::move(op), std::move(operands)};
    return e;
}

bool is_reserved_symbol(std::string_view name) {
    return name == "if" || name == "lambda" || name == "mem" || name == "scope_include" || name == "true" ||
           name == "false";
}

std::vector<Directive> parse_program(std::string_view text) {
    Reader reader(text);
    std::vector<Directive> out;
    for (const SExpr& s : reader.read_all()) out.push_back(to_directive(s));
    return out;
}

double numeric_value(const Numeric& n) {
    if (const double* d = std::get_if<double>(&n)) return *d;
    throw UnboundParameter(std::get<PlaceholderExpr>(n).name);
}

ExprPtr desugar(const ExprPtr& expr, const Bindings& bindings) {
    struct Visitor {
        const Expression& self;
        const Bindings& b;
        ExprPtr operator()(const ConstantExpr&) const { return nullptr; }
        ExprPtr operator()(const SymbolExpr&) const { return nullptr; }
        ExprPtr operator()(const PlaceholderExpr& p) const {
            auto e = std::make_shared<Expression>();
            e->location = self.location;
            e->node = ConstantExpr{lookup_binding(p, b)};
            return e;
        }
        ExprPtr operator()(const CombinationExpr& c) const {
            CombinationExpr out{desugar(c.op, b), {}};
            for (const auto& o : c.operands) out.operands.push_back(desugar(o, b));
            auto e = std::make_shared<Expression>();
            e->location = self.location;
            e->node = std::move(out);
            return e;
        }
        ExprPtr operator()(const LambdaExpr& l) const {
            auto e = std::make_shared<Expression>();
            e->location = self.location;
            e->node = LambdaExpr{l.params, desugar(l.body, b)};
            return e;
        }
        ExprPtr operator()(const IfExpr& i) const {
            auto e = std::make_shared<Expression>();
            e->location = self.location;
            e->node = IfExpr{desugar(i.predicate, b), desugar(i.consequent, b), desugar(i.alternate, b)};
            return e;
        }
    };
    ExprPtr replaced = std::visit(Visitor{*expr, bindings}, expr->node);
    return replaced ? replaced : expr;
}

std::vector<Directive> desugar(const std::vector<Directive>& program, const Bindings& bindings) {
    std::vector<Directive> out;
    out.reserve(program.size());
    for (const Directive& d : program) {
        Directive r = d;
        if (auto* a = std::get_if<AssumeDirective>(&r.node)) {
            a->expr = desugar(a->expr, bindings);
        } else if (auto* o = std::get_if<ObserveDirective>(&r.node)) {
            o->expr = desugar(o->expr, bindings);
            o->value = desugar(o->value, bindings);
        } else if (auto* p = std::get_if<PredictDirective>(&r.node)) {
            p->expr = desugar(p->expr, bindings);
        } else if (auto* i = std::get_if<InferDirective>(&r.node)) {
            i->expr = desugar_infer(i->expr, bindings);
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::string to_string(const Expression& e) {
    struct Visitor {
        std::string operator()(const ConstantExpr& c) const {
            if (c.value.is_number()) return format_number(c.value.as_real());
            if (c.value.is_vector()) {
                std::string s = "(vector";
                for (double x : c.value.as_vector()) s += " " + format_number(x);
                return s + ")";
            }
            return c.value.to_string();
        }
        std::string operator()(const SymbolExpr& s) const { return s.name; }
        std::string operator()(const PlaceholderExpr& p) const { return numeric_text(Numeric{p}); }
        std::string operator()(const CombinationExpr& c) const {
            std::string s = "(" + to_string(*c.op);
            for (const auto& o : c.operands) s += " " + to_string(*o);
            return s + ")";
        }
        std::string operator()(const LambdaExpr& l) const {
            std::string s = "(lambda (";
            for (std::size_t i = 0; i < l.params.size(); ++i) s += (i ? " " : "") + l.params[i];
            return s + ") " + to_string(*l.body) + ")";
        }
        std::string operator()(const IfExpr& i) const {
            return "(if " + to_string(*i.predicate) + " " + to_string(*i.consequent) + " " +
                   to_string(*i.alternate) + ")";
        }
    };
    return std::visit(Visitor{}, e.node);
}

std::string to_string(const InferExpression& e) {
    struct Visitor {
        std::string operator()(const MHExpr& m) const {
            return "(mh " + m.scope + " " + target_text(m.target) + proposal_text(m.proposal) + " " +
                   numeric_text(m.steps) + ")";
        }
        std::string operator()(const SubsampledMHExpr& s) const {
            return "(subsampled_mh " + s.scope + " " + target_text(s.target) + " " + numeric_text(s.batch) + " " +
                   numeric_text(s.epsilon) + proposal_text(s.proposal) + " " + numeric_text(s.steps) + ")";
        }
        std::string operator()(const CycleExpr& c) const {
            std::string s = "(cycle (";
            for (std::size_t i = 0; i < c.kernels.size(); ++i) s += (i ? " " : "") + to_string(c.kernels[i]);
            return s + ") " + numeric_text(c.repeats) + ")";
        }
        std::string operator()(const UnsupportedExpr& u) const { return u.text; }
    };
    return std::visit(Visitor{}, e.node);
}

std::string to_string(const Directive& d) {
    struct Visitor {
        std::string operator()(const AssumeDirective& a) const { return "[assume " + a.name + " " + to_string(*a.expr) + "]"; }
        std::string operator()(const ObserveDirective& o) const {
            return "[observe " + to_string(*o.expr) + " " + to_string(*o.value) + "]";
        }
        std::string operator()(const PredictDirective& p) const { return "[predict " + to_string(*p.expr) + "]"; }
        std::string operator()(const InferDirective& i) const { return "[infer " + to_string(i.expr) + "]"; }
    };
    return std::visit(Visitor{}, d.node);
}

std::string to_string(const std::vector<Directive>& program) {
    std::string out;
    for (const Directive& d : program) out += to_string(d) + "\n";
    return out;
}

}  // namespace austere
