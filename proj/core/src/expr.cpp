#include "suscept/expr.hpp"
#include "suscept/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

namespace suscept {

namespace {

struct Cursor {
    const std::string& s;
    std::size_t i = 0;

    void skip_ws() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    bool eat(char c) {
        skip_ws();
        if (i < s.size() && s[i] == c) { ++i; return true; }
        return false;
    }
    bool peek(char c) {
        skip_ws();
        return i < s.size() && s[i] == c;
    }
    bool eat_word(const char* w) {
        skip_ws();
        std::size_t n = std::char_traits<char>::length(w);
        if (s.compare(i, n, w) == 0) { i += n; return true; }
        return false;
    }
    bool at_number() {
        skip_ws();
        if (i >= s.size()) return false;
        const char c = s[i];
        return std::isdigit(static_cast<unsigned char>(c)) || c == '.';
    }
    [[noreturn]] void fail(const std::string& why) {
        throw ConfigError("expression parse error at offset " + std::to_string(i) +
                          " in \"" + s + "\": " + why);
    }
    double number() {
        skip_ws();
        if (eat_word("pi")) return std::numbers::pi;
        const char* begin = s.c_str() + i;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("expected a number");
        i += static_cast<std::size_t>(end - begin);
        return v;
    }
    bool done() {
        skip_ws();
        return i >= s.size();
    }
};

// [number '*'] 'x' [('+'|'-') number]  |  number  -> (freq, phase)
void parse_linarg(Cursor& cur, double& freq, double& phase) {
    freq = 0;
    phase = 0;
    double sign = 1;
    if (cur.eat('-')) sign = -1;
    if (cur.at_number() || cur.peek('p')) {
        const double v = sign * cur.number();
        if (cur.eat('*')) {
            if (!cur.eat_word("x")) cur.fail("expected x after coefficient");
            freq = v;
        } else {
            phase = v;
            return;
        }
    } else if (cur.eat_word("x")) {
        freq = sign;
    } else {
        cur.fail("expected linear argument");
    }
    if (cur.eat('+')) phase = cur.number();
    else if (cur.eat('-')) phase = -cur.number();
}

Expr::Term parse_primary(Cursor& cur, double coeff) {
    Expr::Term t;
    t.coeff = coeff;
    const bool is_sin = cur.eat_word("sin");
    if (is_sin || cur.eat_word("cos")) {
        t.kind = is_sin ? Expr::Kind::Sin : Expr::Kind::Cos;
        if (!cur.eat('(')) cur.fail("expected (");
        parse_linarg(cur, t.freq, t.phase);
        if (!cur.eat(')')) cur.fail("expected )");
    } else if (cur.eat_word("x")) {
        t.kind = Expr::Kind::Poly;
        t.power = 1;
        if (cur.eat('^')) {
            const double p = cur.number();
            if (p < 0 || p != std::floor(p) || p > 64)
                cur.fail("power must be a small nonnegative integer");
            t.power = static_cast<int>(p);
        }
    } else {
        cur.fail("expected x, sin or cos");
    }
    return t;
}

Expr::Term parse_term(Cursor& cur, double sign) {
    if (cur.at_number() || cur.peek('p')) {
        const double v = sign * cur.number();
        if (cur.eat('*'))
            return parse_primary(cur, v);
        Expr::Term t;
        t.kind = Expr::Kind::Poly;
        t.coeff = v;
        t.power = 0;
        return t;
    }
    return parse_primary(cur, sign);
}

} // namespace

Expr Expr::parse(const std::string& text) {
    Cursor cur{text};
    std::vector<Term> terms;
    double sign = cur.eat('-') ? -1.0 : 1.0;
    terms.push_back(parse_term(cur, sign));
    while (!cur.done()) {
        if (cur.eat('+')) sign = 1;
        else if (cur.eat('-')) sign = -1;
        else cur.fail("expected + or -");
        terms.push_back(parse_term(cur, sign));
    }
    return Expr(std::move(terms));
}

Expr Expr::constant(double v) {
    Term t;
    t.kind = Kind::Poly;
    t.coeff = v;
    t.power = 0;
    return Expr({t});
}

double Expr::operator()(double x) const {
    double acc = 0;
    for (const auto& t : terms_) {
        switch (t.kind) {
        case Kind::Poly: acc += t.coeff * std::pow(x, t.power); break;
        case Kind::Sin: acc += t.coeff * std::sin(t.freq * x + t.phase); break;
        case Kind::Cos: acc += t.coeff * std::cos(t.freq * x + t.phase); break;
        }
    }
    return acc;
}

Expr Expr::derivative() const {
    std::vector<Term> out;
    for (const auto& t : terms_) {
        Term d = t;
        switch (t.kind) {
        case Kind::Poly:
            if (t.power == 0) continue;
            d.coeff = t.coeff * t.power;
            d.power = t.power - 1;
            break;
        case Kind::Sin:
            d.kind = Kind::Cos;
            d.coeff = t.coeff * t.freq;
            break;
        case Kind::Cos:
            d.kind = Kind::Sin;
            d.coeff = -t.coeff * t.freq;
            break;
        }
        out.push_back(d);
    }
    if (out.empty()) return constant(0.0);
    return Expr(std::move(out));
}

double Expr::sup_bound(double lo, double hi) const {
    const double m = std::max(std::abs(lo), std::abs(hi));
    double acc = 0;
    for (const auto& t : terms_) {
        if (t.kind == Kind::Poly)
            acc += std::abs(t.coeff) * std::pow(m, t.power);
        else
            acc += std::abs(t.coeff);
    }
    return acc;
}

Expr Expr::operator+(const Expr& other) const {
    std::vector<Term> out = terms_;
    out.insert(out.end(), other.terms_.begin(), other.terms_.end());
    return Expr(std::move(out));
}

Expr Expr::scaled(double factor) const {
    std::vector<Term> out = terms_;
    for (auto& t : out) t.coeff *= factor;
    return Expr(std::move(out));
}

Expr Expr::shifted(double constant_v) const {
    return *this + constant(constant_v);
}

std::string Expr::str() const {
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    for (const auto& t : terms_) {
        // the grammar only admits signs between terms, so negative
        // coefficients must round-trip as " - |coeff|"
        if (first)
            os << (std::signbit(t.coeff) ? "-" : "");
        else
            os << (std::signbit(t.coeff) ? " - " : " + ");
        first = false;
        const double mag = std::abs(t.coeff);
        switch (t.kind) {
        case Kind::Poly:
            os << mag;
            if (t.power >= 1) os << "*x";
            if (t.power >= 2) os << "^" << t.power;
            break;
        case Kind::Sin:
        case Kind::Cos:
            os << mag << "*" << (t.kind == Kind::Sin ? "sin" : "cos") << "("
               << t.freq << "*x";
            if (t.phase != 0)
                os << (std::signbit(t.phase) ? " - " : " + ") << std::abs(t.phase);
            os << ")";
            break;
        }
    }
    if (first) os << "0";
    return os.str();
}

} // namespace suscept
